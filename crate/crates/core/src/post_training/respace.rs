//! Timestep respacing: spread a budget of sampling steps over equal segments
//! of the base schedule, lowest-noise segment first.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RespaceError {
    #[error("cannot parse respacing spec {0:?}")]
    Parse(String),
    #[error("respacing spec allocates no steps")]
    ZeroSteps,
    #[error("segment {segment} has {size} base steps, cannot take {count}")]
    Overfull { segment: usize, size: usize, count: usize },
}

pub fn parse_spec(spec: &str) -> Result<Vec<usize>, RespaceError> {
    let counts: Result<Vec<usize>, _> = spec.split(',').map(|s| s.trim().parse::<usize>()).collect();
    match counts {
        Ok(c) if !c.is_empty() => Ok(c),
        _ => Err(RespaceError::Parse(spec.to_string())),
    }
}

/// Sorted base timesteps kept by `spec` over a `base_steps`-step schedule.
///
/// The base range is cut into `len(spec)` segments (the first `base_steps %
/// len` segments get one extra step); segment `i` contributes `spec[i]`
/// evenly spaced steps starting at its first timestep.
pub fn respace(spec: &str, base_steps: usize) -> Result<Vec<usize>, RespaceError> {
    let counts = parse_spec(spec)?;
    if counts.iter().all(|&c| c == 0) {
        return Err(RespaceError::ZeroSteps);
    }
    let n = counts.len();
    let per = base_steps / n;
    let extra = base_steps % n;
    let mut start = 0;
    let mut out = Vec::with_capacity(counts.iter().sum());
    for (i, &count) in counts.iter().enumerate() {
        let size = per + usize::from(i < extra);
        if count > size {
            return Err(RespaceError::Overfull {
                segment: i,
                size,
                count,
            });
        }
        let stride = if count <= 1 {
            1.0
        } else {
            (size - 1) as f64 / (count - 1) as f64
        };
        let mut cur = 0.0f64;
        for _ in 0..count {
            out.push(start + cur.round_ties_even() as usize);
            cur += stride;
        }
        start += size;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn headline_spec() {
        let ts = respace("80,20,0,0", 1000).unwrap();
        assert_eq!(ts.len(), 100);
        assert!(ts.iter().all(|&t| t < 500));
        assert_eq!(ts[0], 0);
        assert_eq!(ts[79], 249);
        assert_eq!(ts[80], 250);
        assert_eq!(ts[99], 499);
    }

    #[test]
    fn identity_and_errors() {
        assert_eq!(respace("4", 4).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(respace("0,0", 10), Err(RespaceError::ZeroSteps));
        assert!(matches!(respace("a,1", 10), Err(RespaceError::Parse(_))));
        assert!(matches!(respace("", 10), Err(RespaceError::Parse(_))));
        assert!(matches!(respace("6", 5), Err(RespaceError::Overfull { .. })));
    }

    proptest! {
        #[test]
        fn steps_stay_in_their_segments(
            counts in prop::collection::vec(0usize..30, 1..6),
            base in 150usize..400,
        ) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let spec = counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
            let ts = respace(&spec, base).unwrap();
            prop_assert_eq!(ts.len(), counts.iter().sum::<usize>());
            prop_assert!(ts.windows(2).all(|w| w[0] < w[1]));
            let n = counts.len();
            let mut start = 0;
            let mut k = 0;
            for (i, &c) in counts.iter().enumerate() {
                let size = base / n + usize::from(i < base % n);
                for _ in 0..c {
                    prop_assert!(ts[k] >= start && ts[k] < start + size);
                    k += 1;
                }
                start += size;
            }
        }
    }
}
