//! Largest all-true rectangle and the greedy disjoint cover of a small raster.

use floorsyntax::grid::BinaryGrid;
use floorsyntax::rect_cover::{greedy_cover, largest_rect};

const ART: &[&str] = &[
    "##########....",
    "##########....",
    "##########....",
    "####..########",
    "####..########",
    "##############",
    "......####....",
];

fn main() {
    let mut g = BinaryGrid::new(ART[0].len(), ART.len());
    for (y, row) in ART.iter().enumerate() {
        for (x, c) in row.chars().enumerate() {
            g.set(x, y, c == '#');
        }
    }
    println!("largest: {:?}", largest_rect(&g));
    let cover = greedy_cover(&g, 2);
    let mut label = vec![vec!['.'; ART[0].len()]; ART.len()];
    for (i, r) in cover.iter().enumerate() {
        println!("rect {i}: origin ({}, {}) size {}x{}", r.x0, r.y0, r.w, r.h);
        for row in &mut label[r.y0..r.y1()] {
            for cell in &mut row[r.x0..r.x1()] {
                *cell = char::from(b'a' + i as u8);
            }
        }
    }
    for row in label {
        println!("{}", row.into_iter().collect::<String>());
    }
}
