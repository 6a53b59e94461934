use serde::Serialize;

use super::system::NystromSystem;
use crate::curves::sigma_max;
use crate::{Error, Result, C64};

/// Which eigenvalues of `A` count as isolated eigenvalues of `H(iξ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenFilter {
    /// `max_j |Σ_{α,β_j}|` of the working space.
    pub threshold: f64,
    pub tau_im: f64,
    pub tau_match: f64,
    pub margin: f64,
}

impl EigenFilter {
    fn with_threshold(threshold: f64) -> Self {
        EigenFilter {
            threshold,
            tau_im: 1e-6,
            tau_match: 1e-3,
            margin: 0.05,
        }
    }

    /// Threshold `max_j |Σ_{α,β_j}|` for the weighted space `L²_α`.
    pub fn weighted(angles: &[f64], alpha: f64) -> Self {
        Self::with_threshold(angles.iter().map(|&b| sigma_max(alpha, b)).fold(0.0, f64::max))
    }

    /// Threshold `max_j |1 − β_j/π| / 2` for the energy space.
    pub fn energy(angles: &[f64]) -> Self {
        Self::weighted(angles, 1.0)
    }

    pub fn cutoff(&self) -> f64 {
        self.threshold * (1.0 + self.margin)
    }

    /// Real eigenvalues inside `(−1/2, 1/2)` beyond the cutoff, descending.
    pub fn candidates(&self, raw: &[C64]) -> Vec<f64> {
        let cutoff = self.cutoff();
        let mut out: Vec<f64> = raw
            .iter()
            .filter(|z| z.im.abs() < self.tau_im && z.re.abs() < 0.5 && z.re.abs() > cutoff)
            .map(|z| z.re)
            .collect();
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub xi: f64,
    pub alpha: f64,
    #[serde(skip)]
    pub eigenvalues_raw: Vec<C64>,
    /// Values on the finer mesh of the accepted pair, descending.
    pub eigenvalues_filtered: Vec<f64>,
    /// `|λ_fine − λ_coarse|` for each filtered eigenvalue.
    pub refinement_agreement: Vec<f64>,
    pub threshold: f64,
    /// Panels per arc of the mesh pair that produced the values.
    pub panels: [usize; 2],
}

/// Outcome of pairing the candidates of two meshes.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// (fine value, |fine − coarse|), descending by value.
    pub pairs: Vec<(f64, f64)>,
    /// Candidates without a partner that are not explained by the
    /// threshold (a value crossing the cutoff between the two meshes).
    pub unexplained: usize,
}

impl Matching {
    pub fn is_consistent(&self) -> bool {
        self.unexplained == 0
    }
}

/// Greedy nearest-neighbour pairing in ascending distance order, accepting
/// pairs closer than `tau_match`.
pub fn match_candidates(coarse: &[f64], fine: &[f64], filter: &EigenFilter) -> Matching {
    let mut distances: Vec<(f64, usize, usize)> = coarse
        .iter()
        .enumerate()
        .flat_map(|(i, c)| fine.iter().enumerate().map(move |(j, f)| ((c - f).abs(), i, j)))
        .filter(|&(d, _, _)| d < filter.tau_match)
        .collect();
    distances.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_c = vec![false; coarse.len()];
    let mut used_f = vec![false; fine.len()];
    let mut pairs = Vec::new();
    for (d, i, j) in distances {
        if !used_c[i] && !used_f[j] {
            used_c[i] = true;
            used_f[j] = true;
            pairs.push((fine[j], d));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let near_cutoff = |x: f64| x.abs() < filter.cutoff() + filter.tau_match;
    let unexplained = coarse
        .iter()
        .zip(&used_c)
        .chain(fine.iter().zip(&used_f))
        .filter(|&(&x, &used)| !used && !near_cutoff(x))
        .count();
    Matching { pairs, unexplained }
}

/// Filters and cross-validates the eigenvalues of `system` against
/// `refined_system`. If some candidate has no partner, the comparison is
/// repeated between the refined system and one with twice its panels;
/// a second failure is `NoConvergence`.
pub fn isolated_eigenvalues(
    system: &NystromSystem,
    refined_system: &NystromSystem,
    filter: &EigenFilter,
) -> Result<EigenResult> {
    if refined_system.len() <= system.len() || refined_system.xi != system.xi {
        return Err(Error::InvalidParams(
            "refined system must share ξ and have strictly more nodes".into(),
        ));
    }
    let raw = system.eigenvalues()?;
    let raw_fine = refined_system.eigenvalues()?;
    let matching = match_candidates(&filter.candidates(&raw), &filter.candidates(&raw_fine), filter);
    let p = system.mesh.params.panels_per_arc;
    let p_fine = refined_system.mesh.params.panels_per_arc;
    let (matching, panels, raw) = if matching.is_consistent() {
        (matching, [p, p_fine], raw_fine)
    } else {
        let finer = refined_system.with_panels(2 * p_fine)?;
        let raw_finer = finer.eigenvalues()?;
        let retry = match_candidates(
            &filter.candidates(&raw_fine),
            &filter.candidates(&raw_finer),
            filter,
        );
        if !retry.is_consistent() {
            return Err(Error::NoConvergence(format!(
                "ξ={}: {} eigenvalue(s) unmatched between {} and {} panels per arc",
                system.xi,
                retry.unexplained,
                p_fine,
                2 * p_fine
            )));
        }
        (retry, [p_fine, 2 * p_fine], raw_finer)
    };
    Ok(EigenResult {
        xi: system.xi,
        alpha: system.alpha,
        eigenvalues_raw: raw,
        eigenvalues_filtered: matching.pairs.iter().map(|p| p.0).collect(),
        refinement_agreement: matching.pairs.iter().map(|p| p.1).collect(),
        threshold: filter.threshold,
        panels,
    })
}
