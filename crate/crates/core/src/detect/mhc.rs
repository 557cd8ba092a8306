//! Minimum heading change.
//!
//! Compares each heading with the one before it in the set, modulo sign,
//! and keeps the later heading of the closest pair.

use crate::model::{norm, Detector, HeadingSet, PrincipalHeading};

use super::DetectError;

#[derive(Debug, Clone, PartialEq)]
pub struct MhcTrace {
    /// `epsilon[k]` for set position `k`; `None` at position 0.
    pub epsilon: Vec<Option<f64>>,
    /// Set position of the returned heading.
    pub chosen_position: usize,
    /// Sample index of the returned heading.
    pub chosen: usize,
}

/// `min(|r[k] + r[k-1]|, |r[k] - r[k-1]|)` for consecutive set entries.
pub fn mhc_detect(headings: &HeadingSet) -> Result<(PrincipalHeading, MhcTrace), DetectError> {
    if headings.len() < 2 {
        return Err(DetectError::TooFewHeadings(headings.len()));
    }
    let mut epsilon = Vec::with_capacity(headings.len());
    epsilon.push(None);
    let mut best = (1, f64::INFINITY);
    for k in 1..headings.len() {
        let cur = headings.heading(k);
        let prev = headings.heading(k - 1);
        let plus = norm((&cur + &prev).view());
        let minus = norm((&cur - &prev).view());
        let eps = plus.min(minus);
        if eps < best.1 {
            best = (k, eps);
        }
        epsilon.push(Some(eps));
    }

    let position = best.0;
    let chosen = headings.indices()[position];
    let heading = PrincipalHeading::new(
        headings.heading(position).to_owned(),
        Detector::Mhc,
        vec![chosen],
        0.0,
    )?;
    Ok((
        heading,
        MhcTrace {
            epsilon,
            chosen_position: position,
            chosen,
        },
    ))
}
