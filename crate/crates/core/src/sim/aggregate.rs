use std::collections::BTreeMap;

use crate::procedure::Procedure;
use crate::Real;

use super::ReplicationRecord;

/// Tukey boxplot of the FDPs in one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxplotStats<T> {
    pub min: T,
    pub q1: T,
    pub median: T,
    pub q3: T,
    pub max: T,
    /// Most extreme observations within 1.5·IQR of the box.
    pub lower_whisker: T,
    pub upper_whisker: T,
    pub outliers: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary<T> {
    pub setting_id: usize,
    pub procedure: Procedure,
    pub s: T,
    pub gamma: T,
    pub rho: T,
    pub m: usize,
    pub replications: usize,
    pub errors: usize,
    /// Mean FDP.
    pub fdr: T,
    /// Standard error of the mean FDP.
    pub fdp_se: T,
    pub boxplot: BoxplotStats<T>,
    pub mean_power: T,
    pub mean_xi: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregateSummary<T> {
    pub cells: Vec<CellSummary<T>>,
}

impl<T: Real> AggregateSummary<T> {
    pub fn cell(&self, setting_id: usize, procedure: Procedure) -> Option<&CellSummary<T>> {
        self.cells.iter().find(|c| c.setting_id == setting_id && c.procedure == procedure)
    }
}

/// Quantile of sorted data by linear interpolation between order statistics
/// (`h = (n − 1)p`).
pub fn quantile_type7<T: Real>(sorted: &[T], p: T) -> T {
    assert!(!sorted.is_empty());
    let h = T::count(sorted.len() - 1) * p;
    let lo = h.floor();
    let i = lo.to_usize().unwrap_or(0).min(sorted.len() - 1);
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (h - lo) * (sorted[j] - sorted[i])
}

fn boxplot<T: Real>(sorted: &[T]) -> BoxplotStats<T> {
    let q = |p: f64| quantile_type7(sorted, T::lit(p));
    let (q1, median, q3) = (q(0.25), q(0.5), q(0.75));
    let reach = T::lit(1.5) * (q3 - q1);
    let (lo_fence, hi_fence) = (q1 - reach, q3 + reach);
    let inside: Vec<T> = sorted.iter().copied().filter(|&v| v >= lo_fence && v <= hi_fence).collect();
    BoxplotStats {
        min: sorted[0],
        q1,
        median,
        q3,
        max: sorted[sorted.len() - 1],
        lower_whisker: inside.first().copied().unwrap_or(q1),
        upper_whisker: inside.last().copied().unwrap_or(q3),
        outliers: sorted.iter().copied().filter(|&v| v < lo_fence || v > hi_fence).collect(),
    }
}

/// Groups records by (setting, procedure). Cells whose records all failed are
/// dropped with a warning.
pub fn aggregate<T: Real>(records: &[ReplicationRecord<T>]) -> AggregateSummary<T> {
    let mut groups: BTreeMap<(usize, Procedure), Vec<&ReplicationRecord<T>>> = BTreeMap::new();
    for r in records {
        groups.entry((r.setting_id, r.procedure)).or_default().push(r);
    }
    let mut cells = Vec::with_capacity(groups.len());
    for ((setting_id, procedure), recs) in groups {
        let ok: Vec<&ReplicationRecord<T>> = recs.iter().copied().filter(|r| r.is_ok()).collect();
        let errors = recs.len() - ok.len();
        if ok.is_empty() {
            log::warn!("setting {setting_id} {procedure}: no successful replications, cell omitted");
            continue;
        }
        let n = T::count(ok.len());
        let mut fdps: Vec<T> = ok.iter().map(|r| r.fdp).collect();
        fdps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let fdr = fdps.iter().copied().sum::<T>() / n;
        let fdp_se = if ok.len() > 1 {
            let ss: T = fdps.iter().map(|&f| (f - fdr) * (f - fdr)).sum();
            (ss / (n - T::one())).sqrt() / n.sqrt()
        } else {
            T::zero()
        };
        let xis: Vec<T> = ok.iter().filter_map(|r| r.xi_hat).collect();
        let first = ok[0];
        cells.push(CellSummary {
            setting_id,
            procedure,
            s: first.s,
            gamma: first.gamma,
            rho: first.rho,
            m: first.m,
            replications: ok.len(),
            errors,
            fdr,
            fdp_se,
            boxplot: boxplot(&fdps),
            mean_power: ok.iter().map(|r| r.power).sum::<T>() / n,
            mean_xi: (!xis.is_empty()).then(|| xis.iter().copied().sum::<T>() / T::count(xis.len())),
        });
    }
    AggregateSummary { cells }
}

#[cfg(test)]
mod tests {
    use super::super::{run_grid, GridOptions, SimulationSetting};
    use super::*;

    fn record(setting_id: usize, procedure: Procedure, fdp: f64) -> ReplicationRecord<f64> {
        ReplicationRecord {
            setting_id,
            replication: 0,
            seed: 0,
            procedure,
            s: 0.1,
            gamma: 0.1,
            rho: 0.0,
            m: 10,
            rejections: 2,
            false_discoveries: 1,
            true_discoveries: 1,
            fdp,
            power: 0.5,
            xi_hat: None,
            pdc_tail: None,
            wall_ms: 0,
            error: None,
        }
    }

    #[test]
    fn mean_fdp() {
        let s = aggregate(&[record(0, Procedure::Bh, 0.0), record(0, Procedure::Bh, 0.5)]);
        assert_eq!(s.cells.len(), 1);
        assert_eq!(s.cells[0].fdr, 0.25);
        assert_eq!(s.cells[0].fdp_se, 0.25);
    }

    #[test]
    fn identical_fdps_give_zero_width_box() {
        let recs: Vec<_> = (0..100).map(|_| record(0, Procedure::Mfahs, 0.08)).collect();
        let b = &aggregate(&recs).cells[0].boxplot;
        assert_eq!((b.q1, b.median, b.q3), (0.08, 0.08, 0.08));
        assert_eq!((b.lower_whisker, b.upper_whisker), (0.08, 0.08));
        assert!(b.outliers.is_empty());
    }

    #[test]
    fn quartiles_and_outliers() {
        let v: Vec<f64> = (1..=10).map(|i| i as f64).chain([40.0]).collect();
        // Type-7 quartiles of 1..10 ∪ {40}: 3.5, 6, 8.5.
        let recs: Vec<_> = v.iter().map(|&f| record(0, Procedure::Bh, f)).collect();
        let b = &aggregate(&recs).cells[0].boxplot;
        assert_eq!((b.q1, b.median, b.q3), (3.5, 6.0, 8.5));
        assert_eq!(b.outliers, vec![40.0]);
        assert_eq!((b.lower_whisker, b.upper_whisker), (1.0, 10.0));
        assert_eq!(quantile_type7(&[1.0, 2.0], 0.5), 1.5);
    }

    #[test]
    fn failed_cells_are_dropped() {
        let mut bad = record(1, Procedure::Locfdr, f64::NAN);
        bad.error = Some("fit".into());
        let s = aggregate(&[bad, record(0, Procedure::Bh, 0.1)]);
        assert_eq!(s.cells.len(), 1);
        assert!(s.cell(1, Procedure::Locfdr).is_none());
    }

    #[test]
    fn bh_controls_fdr_at_desk_scale() {
        let st = SimulationSetting::new(2_000, 0.1, 0.1, 0.0, 30, 21, vec![Procedure::Bh]);
        let s = aggregate(&run_grid(&[st], &GridOptions::default()));
        let c = &s.cells[0];
        assert_eq!(c.replications, 30);
        assert!(c.fdr <= 0.1 + 2.0 * c.fdp_se, "fdr {} se {}", c.fdr, c.fdp_se);
    }
}
