//! Eigenvector formulation of the all-ones variant, used to validate the
//! iterative engine along an independent algebraic route.
//!
//! For a pruned matrix M with diversity D and ubiquity U, the country-space
//! operator is `S = D^{-1} M U^{-1} M^T`. Its leading eigenvector is the
//! constant vector; the scores are the eigenvector of the second-largest
//! eigenvalue. S is similar to the symmetric positive-semidefinite matrix
//! `T = D^{-1/2} M U^{-1} M^T D^{-1/2}`, so the computation runs a symmetric
//! eigendecomposition of T and maps the eigenvector back with `D^{-1/2}`.
//!
//! The second eigenvector is only well-defined on a connected bipartite
//! graph; disconnected input is an error.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::engine::MetricError;
use crate::stats;
use crate::weights::WeightMatrix;

/// Standardized, diversity-oriented country scores from the second
/// eigenvector of the country-space operator.
pub fn eigen_eci_oracle(w: &WeightMatrix) -> Result<Vec<f64>, MetricError> {
    let nc = w.n_countries();
    let np = w.n_products();
    if nc < 2 || np < 1 {
        return Err(MetricError::MatrixTooSmall {
            countries: nc,
            products: np,
        });
    }
    if w.diversity().iter().any(|&d| d <= 0.0) || w.ubiquity().iter().any(|&u| u <= 0.0) {
        return Err(MetricError::UnprunedInput);
    }
    if !is_connected(w) {
        return Err(MetricError::Disconnected);
    }

    let inv_sqrt_div: Vec<f64> = w.diversity().iter().map(|&d| 1.0 / d.sqrt()).collect();
    let mut t = DMatrix::<f64>::zeros(nc, nc);
    for p in 0..np {
        let col = w.col(p);
        let inv_ubiquity = 1.0 / w.ubiquity()[p];
        for &(c1, w1) in col {
            for &(c2, w2) in col {
                t[(c1 as usize, c2 as usize)] +=
                    w1 * w2 * inv_ubiquity * inv_sqrt_div[c1 as usize] * inv_sqrt_div[c2 as usize];
            }
        }
    }

    let eigen = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..nc).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
    let second = order[1];
    let scores: Vec<f64> = (0..nc)
        .map(|c| eigen.eigenvectors[(c, second)] * inv_sqrt_div[c])
        .collect();

    let mut z = stats::zscore(&scores)?;
    if let Some(r) = stats::pearson(&z, w.diversity()) {
        if r < 0.0 {
            for v in z.iter_mut() {
                *v = -*v;
            }
        }
    }
    Ok(z)
}

/// Union-find connectivity over the bipartite graph of positive entries.
pub(crate) fn is_connected(w: &WeightMatrix) -> bool {
    let nc = w.n_countries();
    let np = w.n_products();
    let mut parent: Vec<usize> = (0..nc + np).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (c, p, weight) in w.entries() {
        if weight <= 0.0 {
            continue;
        }
        let a = find(&mut parent, c as usize);
        let b = find(&mut parent, nc + p as usize);
        parent[a] = b;
    }
    let root = find(&mut parent, 0);
    (0..nc + np).all(|x| find(&mut parent, x) == root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{iterate_variant, IterationOptions};
    use crate::synth;
    use crate::variant::VariantSpec;
    use crate::weights::WeightMode;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn binary(countries: &[&str], products: &[&str], cells: &[(u32, u32)]) -> WeightMatrix {
        let entries: Vec<(u32, u32, f64)> = cells.iter().map(|&(c, p)| (c, p, 1.0)).collect();
        WeightMatrix::from_entries(
            WeightMode::BinaryRca,
            2000,
            countries.iter().map(|s| s.to_string()).collect(),
            products.iter().map(|s| s.to_string()).collect(),
            &entries,
        )
        .unwrap()
    }

    #[test]
    fn two_countries_give_plus_minus_one() {
        let w = binary(&["A", "B"], &["p", "q", "r"], &[(0, 0), (0, 1), (0, 2), (1, 2)]);
        let z = eigen_eci_oracle(&w).unwrap();
        assert_abs_diff_eq!(z[0].abs(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(z[1].abs(), 1.0, epsilon = 1e-9);
        // oriented: the diversified country carries the positive score
        assert!(z[0] > 0.0);
    }

    #[test]
    fn permuting_countries_permutes_scores() {
        let countries = ["A", "B", "C"];
        let products = ["p", "q", "r", "s"];
        let cells: &[(u32, u32)] = &[(0, 0), (0, 1), (0, 2), (1, 2), (1, 3), (2, 3)];
        let w = binary(&countries, &products, cells);
        let swap = |c: u32| match c {
            0 => 1,
            1 => 0,
            other => other,
        };
        let permuted: Vec<(u32, u32)> = cells.iter().map(|&(c, p)| (swap(c), p)).collect();
        let w_perm = binary(&countries, &products, &permuted);
        let a = eigen_eci_oracle(&w).unwrap();
        let b = eigen_eci_oracle(&w_perm).unwrap();
        assert_abs_diff_eq!(a[0], b[1], epsilon = 1e-9);
        assert_abs_diff_eq!(a[1], b[0], epsilon = 1e-9);
        assert_abs_diff_eq!(a[2], b[2], epsilon = 1e-9);
    }

    #[test]
    fn disconnected_matrix_is_rejected() {
        let w = binary(
            &["A", "B", "C", "D"],
            &["p", "q"],
            &[(0, 0), (1, 0), (2, 1), (3, 1)],
        );
        assert!(matches!(
            eigen_eci_oracle(&w),
            Err(MetricError::Disconnected)
        ));
    }

    #[test]
    fn matches_iterated_all_ones_variant_in_rank_order() {
        let opts = IterationOptions::default();
        let mut checked = 0;
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = synth::random_binary_weights(&mut rng, 10, 15, 0.3, true).unwrap();
            let scores = iterate_variant(&w, VariantSpec::classic(), &opts).unwrap();
            if scores.degenerate {
                continue;
            }
            let oracle = eigen_eci_oracle(&w).unwrap();
            let rho = crate::stats::spearman(&scores.k_c, &oracle).unwrap();
            assert!(
                rho.abs() >= 0.99,
                "seed {seed}: |spearman| = {} < 0.99",
                rho.abs()
            );
            checked += 1;
        }
        assert!(checked >= 4, "too many degenerate draws");
    }
}
