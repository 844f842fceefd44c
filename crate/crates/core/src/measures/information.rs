use crate::copula::CheckerboardCopula;
use crate::reduce::canonical_sum;

/// Plug-in mutual information `Σ p ln(p / ∏_k 1/m_k)` over cells with
/// positive mass, the entropy of the checkerboard density relative to the
/// uniform marginals.
///
/// On grids approximating a singular copula this grows without bound as the
/// resolution increases, so values are only comparable at equal resolution.
pub(crate) fn mutual_information_value(copula: &CheckerboardCopula) -> f64 {
    let cells = copula.cell_count() as f64;
    let mut terms: Vec<f64> = copula
        .mass()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * (p * cells).ln())
        .collect();
    canonical_sum(&mut terms)
}
