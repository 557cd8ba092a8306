//! Global 2: threshold-free pick of the heading whose sorted component
//! magnitudes sit closest to their sorted predecessors.

use crate::model::{Detector, HeadingSet, PrincipalHeading};

use super::{DetectError, SortedComponents};

#[derive(Debug, Clone, PartialEq)]
pub struct Global2Trace {
    pub sorted: SortedComponents,
    /// `deltas[i][k]`: gap of heading position `k` to its sorted predecessor
    /// in component `i`; `None` for the smallest value.
    pub deltas: Vec<Vec<Option<f64>>>,
    /// Root-sum-square of `deltas` per heading position; `None` if any
    /// component is undefined.
    pub e: Vec<Option<f64>>,
    /// Set position of the returned heading.
    pub chosen_position: usize,
    /// Sample index of the returned heading.
    pub chosen: usize,
}

impl Global2Trace {
    /// Positions attaining the minimum `E`.
    pub fn argmin_set(&self) -> Vec<usize> {
        let min = self.e[self.chosen_position].expect("chosen E is defined");
        self.e
            .iter()
            .enumerate()
            .filter_map(|(k, e)| (*e == Some(min)).then_some(k))
            .collect()
    }
}

pub fn global2_detect(headings: &HeadingSet) -> Result<(PrincipalHeading, Global2Trace), DetectError> {
    let len = headings.len();
    if len < 2 {
        return Err(DetectError::TooFewHeadings(len));
    }
    let sorted = SortedComponents::new(headings);

    let deltas: Vec<Vec<Option<f64>>> = (0..sorted.components())
        .map(|i| {
            let mut by_time = vec![None; len];
            for (m, &k) in sorted.order[i].iter().enumerate() {
                by_time[k] = sorted.gap(i, m);
            }
            by_time
        })
        .collect();

    let e: Vec<Option<f64>> = (0..len)
        .map(|k| {
            deltas
                .iter()
                .map(|col| col[k].map(|d| d * d))
                .sum::<Option<f64>>()
                .map(f64::sqrt)
        })
        .collect();

    // Strict comparison keeps the lowest position among exact ties.
    let mut best: Option<(usize, f64)> = None;
    for (k, ek) in e.iter().enumerate() {
        if let Some(ek) = *ek {
            if best.is_none_or(|(_, b)| ek < b) {
                best = Some((k, ek));
            }
        }
    }
    let (position, _) = best.ok_or(DetectError::NoDefinedE)?;
    let chosen = headings.indices()[position];
    let heading = PrincipalHeading::new(
        headings.heading(position).to_owned(),
        Detector::Global2,
        vec![chosen],
        0.0,
    )?;
    Ok((
        heading,
        Global2Trace {
            sorted,
            deltas,
            e,
            chosen_position: position,
            chosen,
        },
    ))
}
