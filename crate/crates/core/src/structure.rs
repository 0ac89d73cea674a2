//! Which types die out, whether a degeneracy certificate exists, and the
//! affine subspace that must contain the recurrent class.
//!
//! Everything here is decided exactly from the supports and the zero pattern
//! of the mean matrix; no floating-point rank decisions are made.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::model::{mean_matrix, GwiModel};
use crate::rational;
use crate::vector::CountVector;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DieOutReport {
    /// Zero-based indices of the types that die out, ascending.
    pub dead: Vec<usize>,
    /// For each live type `j`, a path `i → … → j` of positive mean-matrix
    /// entries starting at an immigration-supported type `i`.
    pub witness: Vec<(usize, Vec<usize>)>,
    /// Innovation is identically zero, so the process is absorbed at 0.
    pub no_immigration: bool,
}

impl DieOutReport {
    pub fn is_dead(&self, j: usize) -> bool {
        self.dead.binary_search(&j).is_ok()
    }
}

/// Breadth-first reachability from `{i : Eη_i > 0}` in the digraph with
/// edge `a → b` iff `M_{a,b} > 0`.
pub fn dead_types(model: &GwiModel) -> DieOutReport {
    let p = model.dim();
    let m = mean_matrix(model);
    let eta_mean = model.innovation_mean();
    let mut parent: Vec<Option<usize>> = alloc::vec![None; p];
    let mut reached = alloc::vec![false; p];
    let mut queue = VecDeque::new();
    for (i, e) in eta_mean.iter().enumerate() {
        if !e.is_zero() {
            reached[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(a) = queue.pop_front() {
        for b in 0..p {
            if !reached[b] && m.is_positive(a, b) {
                reached[b] = true;
                parent[b] = Some(a);
                queue.push_back(b);
            }
        }
    }
    let dead = (0..p).filter(|&j| !reached[j]).collect();
    let witness = (0..p)
        .filter(|&j| reached[j])
        .map(|j| {
            let mut path = alloc::vec![j];
            let mut cur = j;
            while let Some(prev) = parent[cur] {
                path.push(prev);
                cur = prev;
            }
            path.reverse();
            (j, path)
        })
        .collect();
    DieOutReport { dead, witness, no_immigration: eta_mean.iter().all(Zero::is_zero) }
}

/// `c ≠ 0` with `c^T s = 0` on every offspring support point and `c^T t`
/// constant on the innovation support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependenceCertificate {
    /// Coprime integers, first non-zero entry positive.
    pub c: Vec<BigInt>,
    pub constant: BigRational,
}

impl DependenceCertificate {
    pub fn evaluate(&self, x: &CountVector) -> BigRational {
        let s: BigInt = self.c.iter().zip(x.entries()).map(|(c, &xi)| c * BigInt::from(xi)).sum();
        BigRational::from_integer(s)
    }

    pub fn c_f64(&self) -> Vec<f64> {
        self.c.iter().map(|c| rational::to_f64(&BigRational::from_integer(c.clone()))).collect()
    }
}

fn as_row(x: &CountVector) -> Vec<BigRational> {
    x.entries().iter().map(|&c| BigRational::from_integer(c.into())).collect()
}

/// First null-space vector (reduced-echelon order) of the span of all
/// offspring support points together with the innovation differences
/// `t − t_0`, or `None` when that span is all of `R^p`.
pub fn dependence_certificate(model: &GwiModel) -> Option<DependenceCertificate> {
    let p = model.dim();
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    for law in model.offspring_laws() {
        rows.extend(law.support().filter(|s| !s.is_zero()).map(as_row));
    }
    let mut eta = model.innovation().support();
    let t0 = as_row(eta.next().expect("innovation law is non-empty"));
    for t in eta {
        rows.push(as_row(t).iter().zip(&t0).map(|(a, b)| a - b).collect());
    }
    let basis = rational::null_space(rows, p);
    let first = basis.first()?;
    let c = rational::primitive_integer(first);
    let constant = c.iter().zip(&t0).map(|(ci, ti)| BigRational::from_integer(ci.clone()) * ti).sum();
    Some(DependenceCertificate { c, constant })
}

/// One affine constraint `normal^T x = offset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineConstraint {
    pub normal: Vec<BigInt>,
    pub offset: BigRational,
}

impl AffineConstraint {
    pub fn holds(&self, x: &CountVector) -> bool {
        let s: BigInt = self.normal.iter().zip(x.entries()).map(|(c, &xi)| c * BigInt::from(xi)).sum();
        BigRational::from_integer(s) == self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineHullPrediction {
    pub constraints: Vec<AffineConstraint>,
    pub degenerate: bool,
}

impl AffineHullPrediction {
    pub fn admits(&self, x: &CountVector) -> bool {
        self.constraints.iter().all(|c| c.holds(x))
    }
}

/// Full structural report: dead types, certificate and the implied constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureReport {
    pub die_out: DieOutReport,
    pub certificate: Option<DependenceCertificate>,
    pub hull: AffineHullPrediction,
}

pub fn affine_hull_prediction(model: &GwiModel) -> AffineHullPrediction {
    analyze(model).hull
}

pub fn analyze(model: &GwiModel) -> StructureReport {
    let p = model.dim();
    let die_out = dead_types(model);
    let certificate = dependence_certificate(model);
    let mut constraints: Vec<AffineConstraint> = die_out
        .dead
        .iter()
        .map(|&j| {
            let mut normal = alloc::vec![BigInt::zero(); p];
            normal[j] = BigInt::from(1);
            AffineConstraint { normal, offset: BigRational::zero() }
        })
        .collect();
    if let Some(cert) = &certificate {
        constraints.push(AffineConstraint { normal: cert.c.clone(), offset: cert.constant.clone() });
    }
    let degenerate = !constraints.is_empty();
    StructureReport { die_out, certificate, hull: AffineHullPrediction { constraints, degenerate } }
}

/// Dimension of the affine hull of a finite point set, computed exactly.
pub fn affine_dimension(points: &[CountVector]) -> usize {
    let Some(base) = points.first() else {
        return 0;
    };
    let p = base.dim();
    let b = as_row(base);
    let rows = points[1..].iter().map(|x| as_row(x).iter().zip(&b).map(|(a, c)| a - c).collect()).collect();
    rational::rank(rows, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::law::FiniteLaw;

    #[test]
    fn model_a_type_two_dies_out() {
        let report = dead_types(&fixtures::model_a());
        assert_eq!(report.dead, alloc::vec![1]);
        assert_eq!(report.witness, alloc::vec![(0, alloc::vec![0])]);
    }

    #[test]
    fn immigration_on_every_type_means_nothing_dies() {
        let eta = FiniteLaw::from_triples(2, &[(&[1, 0], 1, 2), (&[0, 1], 1, 2)]);
        let xi = FiniteLaw::point(CountVector::zeros(2));
        let model = GwiModel::new(alloc::vec![xi.clone(), xi], eta).unwrap();
        assert!(dead_types(&model).dead.is_empty());
    }

    #[test]
    fn three_type_chain_is_fully_reached() {
        let xi1 = FiniteLaw::from_triples(3, &[(&[0, 0, 0], 1, 2), (&[0, 1, 0], 1, 2)]);
        let xi2 = FiniteLaw::from_triples(3, &[(&[0, 0, 0], 1, 2), (&[0, 0, 1], 1, 2)]);
        let xi3 = FiniteLaw::point(CountVector::zeros(3));
        let eta = FiniteLaw::from_triples(3, &[(&[0, 0, 0], 1, 2), (&[1, 0, 0], 1, 2)]);
        let model = GwiModel::new(alloc::vec![xi1, xi2, xi3], eta).unwrap();
        let report = dead_types(&model);
        assert!(report.dead.is_empty());
        assert_eq!(report.witness[2], (2, alloc::vec![0, 1, 2]));
    }

    #[test]
    fn zero_innovation_kills_everything() {
        let model = fixtures::immigration_only(&[0, 0]);
        let report = dead_types(&model);
        assert_eq!(report.dead, alloc::vec![0, 1]);
        assert!(report.no_immigration);
    }

    #[test]
    fn model_b_certificate() {
        let cert = dependence_certificate(&fixtures::model_b()).unwrap();
        assert_eq!(cert.c, alloc::vec![BigInt::from(1), BigInt::from(-1)]);
        assert_eq!(cert.constant, BigRational::from_integer(1.into()));
    }

    #[test]
    fn model_a_has_no_certificate() {
        assert!(dependence_certificate(&fixtures::model_a()).is_none());
    }

    #[test]
    fn trivial_offspring_certificate_is_first_unit_vector() {
        let cert = dependence_certificate(&fixtures::immigration_only(&[2, 3])).unwrap();
        assert_eq!(cert.c, alloc::vec![BigInt::from(1), BigInt::from(0)]);
        assert_eq!(cert.constant, BigRational::from_integer(2.into()));
    }

    #[test]
    fn hull_predictions_for_fixtures() {
        let a = affine_hull_prediction(&fixtures::model_a());
        assert!(a.degenerate);
        assert_eq!(a.constraints.len(), 1);
        assert_eq!(a.constraints[0].normal, alloc::vec![BigInt::from(0), BigInt::from(1)]);
        assert!(a.constraints[0].offset.is_zero());

        let b = affine_hull_prediction(&fixtures::model_b());
        assert!(b.degenerate);
        assert_eq!(b.constraints[0].normal, alloc::vec![BigInt::from(1), BigInt::from(-1)]);
        assert_eq!(b.constraints[0].offset, BigRational::from_integer(1.into()));

        let c = affine_hull_prediction(&fixtures::model_c());
        assert!(!c.degenerate);
        assert!(c.constraints.is_empty());
    }

    #[test]
    fn affine_dimension_of_line_and_plane() {
        let line: Vec<CountVector> = (0..4).map(|k| CountVector::new(alloc::vec![k + 1, k])).collect();
        assert_eq!(affine_dimension(&line), 1);
        let plane = [alloc::vec![0, 0], alloc::vec![1, 0], alloc::vec![0, 1]].map(CountVector::new);
        assert_eq!(affine_dimension(&plane), 2);
    }
}
