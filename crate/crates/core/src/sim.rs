//! Empirical reachable/controllable set approximation over box control
//! ranges.
//!
//! A breadth-first frontier expansion over a deterministic control lattice
//! approximates `ℛ_k(e)` from below: every cloud point is genuinely
//! reachable (up to the arithmetic of the chart), but the cloud is only a
//! lower bound on the true set. Spatial-hash pruning at `prune_cell`
//! resolution keeps the cloud finite; `max_points` caps the budget and sets
//! the `truncated` flag instead of failing. Backward clouds run the same
//! expansion on the reversed system, whose reachable sets are the original
//! controllable sets.
//!
//! Per-point first-arrival steps are recorded; with `0` in the lattice the
//! level sets are nested, so first arrival is well defined.

use std::io::Write;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel};
use crate::system::{ControlRange, GridSet, LinearSystem};

/// Parameters of a cloud run.
#[derive(Clone, Debug, PartialEq)]
pub struct CloudConfig {
    /// Number of BFS levels (steps of the dynamics).
    pub steps: usize,
    /// Lattice resolution per control channel; 1 means `{0}` only,
    /// `n ≥ 2` means `n` evenly spaced values including both box extremes,
    /// with 0 always added.
    pub controls_per_channel: usize,
    /// Spatial-hash cell size in chart coordinates.
    pub prune_cell: f64,
    /// Hard cap on the number of cloud points.
    pub max_points: usize,
    /// Recorded in the metadata for reproducibility of seeded consumers;
    /// the lattice expansion itself is fully deterministic.
    pub seed: u64,
}

impl CloudConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::Argument("cloud needs at least one step".into()));
        }
        if self.controls_per_channel < 1 {
            return Err(Error::Argument("need at least one lattice control".into()));
        }
        if !(self.prune_cell > 0.0 && self.prune_cell.is_finite()) {
            return Err(Error::Argument("prune cell must be positive".into()));
        }
        if self.max_points < 1 {
            return Err(Error::Argument("point budget must be positive".into()));
        }
        Ok(())
    }
}

impl Default for CloudConfig {
    fn default() -> Self {
        CloudConfig {
            steps: 6,
            controls_per_channel: 3,
            prune_cell: 1e-3,
            max_points: 1_000_000,
            seed: 42,
        }
    }
}

/// Expansion direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Approximate `ℛ_k(from)`.
    Forward,
    /// Approximate `𝒞_k(from)` by expanding the reversed system.
    Backward,
}

/// A deduplicated cloud of reached chart points with first-arrival steps.
#[derive(Clone, Debug)]
pub struct PointCloud {
    pub points: Vec<GroupElement>,
    /// BFS level at which each point first appeared.
    pub k_reached: Vec<usize>,
    pub config: CloudConfig,
    /// Human-readable system identification for the metadata block.
    pub system_summary: String,
    /// Set when the point budget stopped the expansion early.
    pub truncated: bool,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The control lattice: `n` evenly spaced values per channel including the
/// box extremes, always containing 0, crossed over channels.
pub fn control_lattice(range: &ControlRange, n: usize) -> Result<Vec<Vec<f64>>> {
    let (lo, hi) = match range {
        ControlRange::Box { lo, hi } => (lo, hi),
        ControlRange::FiniteSet { .. } => {
            return Err(Error::Precondition(
                "cloud expansion requires a box control range".into(),
            ))
        }
    };
    let mut lattice: Vec<Vec<f64>> = vec![Vec::new()];
    for c in 0..lo.len() {
        let mut choices: Vec<f64> = if n == 1 {
            vec![0.0]
        } else {
            let mut v: Vec<f64> = (0..n)
                .map(|i| lo[c] + (hi[c] - lo[c]) * i as f64 / (n - 1) as f64)
                .collect();
            if !v.contains(&0.0) {
                v.push(0.0);
            }
            v
        };
        choices.sort_by(f64::total_cmp);
        choices.dedup();
        let mut next = Vec::with_capacity(lattice.len() * choices.len());
        for prefix in &lattice {
            for &v in &choices {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        lattice = next;
    }
    Ok(lattice)
}

/// BFS cloud of `ℛ_k(e)` / `𝒞_k(e)`.
pub fn reach_cloud(
    sys: &LinearSystem,
    cfg: &CloudConfig,
    direction: Direction,
) -> Result<PointCloud> {
    let e = sys.model().identity();
    reach_cloud_from(sys, cfg, direction, &e)
}

/// BFS cloud started from an arbitrary point.
pub fn reach_cloud_from(
    sys: &LinearSystem,
    cfg: &CloudConfig,
    direction: Direction,
    from: &GroupElement,
) -> Result<PointCloud> {
    cfg.validate()?;
    let summary = format!(
        "family={:?} dim={} channels={} direction={:?}",
        sys.model().family(),
        sys.dim(),
        sys.channels(),
        direction
    );
    let worker;
    let sys = match direction {
        Direction::Forward => sys,
        Direction::Backward => {
            worker = sys.reversed()?;
            &worker
        }
    };
    let lattice = control_lattice(sys.range(), cfg.controls_per_channel)?;

    let mut seen = GridSet::new(cfg.prune_cell, sys.dim());
    seen.insert(from.as_slice());
    let mut points = vec![from.clone()];
    let mut k_reached = vec![0usize];
    let mut truncated = false;
    let mut frontier_start = 0usize;

    'levels: for level in 1..=cfg.steps {
        let frontier_end = points.len();
        if frontier_start == frontier_end {
            break; // stationary cloud
        }
        for idx in frontier_start..frontier_end {
            let base = points[idx].clone();
            for u in &lattice {
                let image = match sys.map_fu(&base, u) {
                    Ok(p) => p,
                    // Chart exits (e.g. Aff2 first coordinate underflow)
                    // just prune that branch.
                    Err(Error::Domain(_)) => continue,
                    Err(e) => return Err(e),
                };
                if seen.insert(image.as_slice()) {
                    if points.len() >= cfg.max_points {
                        truncated = true;
                        break 'levels;
                    }
                    points.push(image);
                    k_reached.push(level);
                }
            }
        }
        frontier_start = frontier_end;
    }

    Ok(PointCloud {
        points,
        k_reached,
        config: cfg.clone(),
        system_summary: summary,
        truncated,
    })
}

/// Fraction of the grid cells of `[lo, hi]` at the given resolution that
/// contain at least one cloud point. Points outside the box are ignored;
/// points exactly on the upper face count into the last cell.
pub fn coverage(cloud: &PointCloud, lo: &[f64], hi: &[f64], resolution: f64) -> Result<f64> {
    if lo.len() != hi.len() || lo.is_empty() {
        return Err(Error::Argument(
            "coverage box bounds must be non-empty and match".into(),
        ));
    }
    if resolution <= 0.0 || resolution.is_nan() {
        return Err(Error::Argument(
            "coverage resolution must be positive".into(),
        ));
    }
    let dims: Vec<usize> = lo
        .iter()
        .zip(hi)
        .map(|(l, h)| {
            if h <= l {
                return Err(Error::Argument(
                    "coverage box must have positive extent".into(),
                ));
            }
            Ok(((h - l) / resolution).ceil() as usize)
        })
        .collect::<Result<_>>()?;
    let total: f64 = dims.iter().map(|&n| n as f64).product();
    if total > 1e8 {
        return Err(Error::Resource(format!(
            "coverage grid has {total:.3e} cells"
        )));
    }
    let total = total as usize;

    let mut occupied = std::collections::HashSet::new();
    'points: for p in &cloud.points {
        let mut key = Vec::with_capacity(lo.len());
        for ((x, l), (h, n)) in p.as_slice().iter().zip(lo).zip(hi.iter().zip(&dims)) {
            if *x < *l || *x > *h {
                continue 'points;
            }
            let mut cell = ((x - l) / resolution).floor() as usize;
            if cell >= *n {
                cell = n - 1;
            }
            key.push(cell);
        }
        occupied.insert(key);
    }
    Ok(occupied.len() as f64 / total as f64)
}

/// Result of [`duality_cloud_check`].
#[derive(Clone, Debug)]
pub struct DualityReport {
    /// Forward enumeration of the reversed system equals the backward
    /// enumeration of the system.
    pub equal: bool,
    pub reversed_forward_count: usize,
    pub backward_count: usize,
    pub tol: f64,
}

/// Exact duality witness over a finite control set: the `k`-step reachable
/// set of the reversed system must equal the `k`-step controllable set.
pub fn duality_cloud_check(sys: &LinearSystem, k: usize, tol: f64) -> Result<DualityReport> {
    let e = sys.model().identity();
    let reversed_forward = sys.reversed()?.reachable_set_finite(k, &e)?;
    let backward = sys.controllable_set_finite(k, &e)?;
    let equal = crate::system::set_eq(sys.model(), &reversed_forward, &backward, tol);
    Ok(DualityReport {
        equal,
        reversed_forward_count: reversed_forward.len(),
        backward_count: backward.len(),
        tol,
    })
}

/// Serialize a cloud as CSV: header `k,x1,...,xd`, decimal notation with 12
/// significant digits, LF line endings.
pub fn write_csv<W: Write>(
    model: &GroupModel,
    cloud: &PointCloud,
    out: &mut W,
) -> std::io::Result<()> {
    let d = model.dim();
    let mut header = String::from("k");
    for i in 1..=d {
        header.push_str(&format!(",x{i}"));
    }
    out.write_all(header.as_bytes())?;
    out.write_all(b"\n")?;
    for (p, k) in cloud.points.iter().zip(&cloud.k_reached) {
        let mut line = format!("{k}");
        for &x in p.as_slice() {
            line.push(',');
            line.push_str(&format_significant(x));
        }
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Decimal notation with 12 significant digits.
fn format_significant(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).clamp(0, 30) as usize;
    format!("{v:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::poly::Poly;
    use crate::spectral::AutomorphismModel;
    use crate::system::ControlMap;

    fn integrator_1d(r: f64) -> LinearSystem {
        let model = GroupModel::euclidean(1).unwrap();
        let aut = AutomorphismModel::linear(&model, Matrix::from_element(1, 1, 1.0)).unwrap();
        let beta = ControlMap::LinearB(Matrix::from_element(1, 1, 1.0));
        LinearSystem::new(model, aut, beta, ControlRange::symmetric_box(1, r).unwrap()).unwrap()
    }

    fn aff2_leaf_system() -> LinearSystem {
        // h ≡ 1: motion confined to {x} × ℝ.
        let model = GroupModel::aff2();
        let aut = AutomorphismModel::aff2(&model, 1.0, 2.0).unwrap();
        let beta = ControlMap::Aff2Poly {
            h: Poly::new(vec![1.0]),
            g: Poly::new(vec![0.0, 1.0]),
        };
        LinearSystem::new(
            model,
            aut,
            beta,
            ControlRange::symmetric_box(1, 1.0).unwrap(),
        )
        .unwrap()
    }

    fn cfg(steps: usize, n: usize) -> CloudConfig {
        CloudConfig {
            steps,
            controls_per_channel: n,
            prune_cell: 1e-6,
            max_points: 100_000,
            seed: 42,
        }
    }

    #[test]
    fn integer_grid_walk() {
        let sys = integrator_1d(1.0);
        let cloud = reach_cloud(&sys, &cfg(3, 3), Direction::Forward).unwrap();
        let mut xs: Vec<f64> = cloud.points.iter().map(|p| p.as_slice()[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        assert!(!cloud.truncated);
        // First arrival grows with |x|.
        for (p, k) in cloud.points.iter().zip(&cloud.k_reached) {
            assert_eq!(*k, p.as_slice()[0].abs() as usize);
        }
    }

    #[test]
    fn trivial_lattice_keeps_identity_fixed() {
        let sys = integrator_1d(1.0);
        let cloud = reach_cloud(&sys, &cfg(1, 1), Direction::Forward).unwrap();
        assert_eq!(cloud.len(), 1);
        assert_eq!(cloud.points[0].as_slice(), &[0.0]);
    }

    #[test]
    fn monotone_levels() {
        let sys = integrator_1d(1.0);
        let c4 = reach_cloud(&sys, &cfg(4, 3), Direction::Forward).unwrap();
        let c6 = reach_cloud(&sys, &cfg(6, 3), Direction::Forward).unwrap();
        assert!(crate::system::set_subset(
            sys.model(),
            &c4.points,
            &c6.points,
            1e-9
        ));
    }

    #[test]
    fn truncation_sets_the_flag() {
        let sys = integrator_1d(1.0);
        let mut c = cfg(6, 3);
        c.max_points = 5;
        let cloud = reach_cloud(&sys, &c, Direction::Forward).unwrap();
        assert!(cloud.truncated);
        assert_eq!(cloud.len(), 5);
    }

    #[test]
    fn coverage_of_full_grid() {
        let sys = integrator_1d(1.0);
        let cloud = reach_cloud(&sys, &cfg(3, 3), Direction::Forward).unwrap();
        let f = coverage(&cloud, &[-2.0], &[2.0], 1.0).unwrap();
        assert_eq!(f, 1.0);
    }

    #[test]
    fn coverage_of_motionless_system() {
        let model = GroupModel::euclidean(2).unwrap();
        let aut = AutomorphismModel::linear(&model, Matrix::identity(2, 2)).unwrap();
        let beta = ControlMap::LinearB(Matrix::zeros(2, 1));
        let sys = LinearSystem::new(
            model,
            aut,
            beta,
            ControlRange::symmetric_box(1, 1.0).unwrap(),
        )
        .unwrap();
        let cloud = reach_cloud(&sys, &cfg(4, 3), Direction::Forward).unwrap();
        assert_eq!(cloud.len(), 1);
        let f = coverage(&cloud, &[-1.0, -1.0], &[1.0, 1.0], 0.5).unwrap();
        assert_eq!(f, 1.0 / 16.0);
    }

    #[test]
    fn deterministic_csv_bytes() {
        let sys = integrator_1d(1.0);
        let mut bufs = Vec::new();
        for _ in 0..2 {
            let cloud = reach_cloud(&sys, &cfg(4, 5), Direction::Forward).unwrap();
            let mut buf = Vec::new();
            write_csv(sys.model(), &cloud, &mut buf).unwrap();
            bufs.push(buf);
        }
        assert_eq!(bufs[0], bufs[1]);
        let text = String::from_utf8(bufs.pop().unwrap()).unwrap();
        assert!(text.starts_with("k,x1\n"));
        assert!(text.lines().count() > 1);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(0.0), "0");
        assert_eq!(format_significant(2.0), "2.00000000000");
        assert_eq!(format_significant(-0.5), "-0.500000000000");
        assert_eq!(format_significant(12345.678), "12345.6780000");
    }

    #[test]
    fn backward_cloud_is_reversed_forward() {
        let model = GroupModel::euclidean(1).unwrap();
        let aut = AutomorphismModel::linear(&model, Matrix::from_element(1, 1, 2.0)).unwrap();
        let beta = ControlMap::LinearB(Matrix::from_element(1, 1, 1.0));
        let sys = LinearSystem::new(
            model,
            aut,
            beta,
            ControlRange::symmetric_box(1, 1.0).unwrap(),
        )
        .unwrap();
        let back = reach_cloud(&sys, &cfg(3, 3), Direction::Backward).unwrap();
        let fwd_rev =
            reach_cloud(&sys.reversed().unwrap(), &cfg(3, 3), Direction::Forward).unwrap();
        assert!(crate::system::set_eq(
            sys.model(),
            &back.points,
            &fwd_rev.points,
            1e-12
        ));
    }

    #[test]
    fn duality_on_finite_sets() {
        // Forward cloud of the reversed system equals the backward
        // enumeration, exactly.
        let model = GroupModel::euclidean(1).unwrap();
        let aut = AutomorphismModel::linear(&model, Matrix::from_element(1, 1, 2.0)).unwrap();
        let beta = ControlMap::LinearB(Matrix::from_element(1, 1, 1.0));
        let range = ControlRange::FiniteSet {
            points: vec![vec![-1.0], vec![0.0], vec![1.0]],
        };
        let sys = LinearSystem::new(model, aut, beta, range).unwrap();
        for k in [0usize, 1, 2, 3] {
            let report = duality_cloud_check(&sys, k, 1e-9).unwrap();
            assert!(report.equal, "k={k}: {report:?}");
        }

        let aff = {
            let model = GroupModel::aff2();
            let aut = AutomorphismModel::aff2(&model, 1.0, 1.0).unwrap();
            let beta = ControlMap::Aff2Poly {
                h: Poly::new(vec![1.0, 1.0]),
                g: Poly::new(vec![0.0]),
            };
            let range = ControlRange::FiniteSet {
                points: vec![vec![-0.25], vec![0.0], vec![0.25]],
            };
            LinearSystem::new(model, aut, beta, range).unwrap()
        };
        let report = duality_cloud_check(&aff, 2, 1e-9).unwrap();
        assert!(report.equal, "{report:?}");
    }

    #[test]
    fn leaf_confinement_is_bit_exact() {
        let sys = aff2_leaf_system();
        let start = sys.model().element(&[1.7, -0.4]).unwrap();
        let cloud = reach_cloud_from(&sys, &cfg(5, 3), Direction::Forward, &start).unwrap();
        assert!(cloud.len() > 1);
        for p in &cloud.points {
            assert_eq!(p.as_slice()[0].to_bits(), 1.7f64.to_bits());
        }
    }

    #[test]
    fn cloud_requires_box_range() {
        let model = GroupModel::euclidean(1).unwrap();
        let aut = AutomorphismModel::linear(&model, Matrix::from_element(1, 1, 1.0)).unwrap();
        let beta = ControlMap::LinearB(Matrix::from_element(1, 1, 1.0));
        let range = ControlRange::FiniteSet {
            points: vec![vec![0.0]],
        };
        let sys = LinearSystem::new(model, aut, beta, range).unwrap();
        assert!(matches!(
            reach_cloud(&sys, &cfg(2, 3), Direction::Forward),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn config_and_coverage_guards() {
        let base = cfg(2, 3);
        for bad in [
            CloudConfig {
                steps: 0,
                ..base.clone()
            },
            CloudConfig {
                controls_per_channel: 0,
                ..base.clone()
            },
            CloudConfig {
                prune_cell: 0.0,
                ..base.clone()
            },
            CloudConfig {
                max_points: 0,
                ..base.clone()
            },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Argument(_))));
        }

        let sys = integrator_1d(1.0);
        let cloud = reach_cloud(&sys, &base, Direction::Forward).unwrap();
        assert!(matches!(
            coverage(&cloud, &[0.0], &[1.0], 0.0),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            coverage(&cloud, &[1.0], &[0.0], 0.5),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            coverage(&cloud, &[-1.0], &[1.0], 1e-12),
            Err(Error::Resource(_))
        ));
    }
}
