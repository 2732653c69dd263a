//! Two-group expression data to z-scores to ranked discoveries.

use std::io::Read;

use crate::error::{Error, Result};
use crate::model::ObservationVector;
use crate::procedure::{run_procedure, Procedure, ProcedureConfig, ProcedureOutcome};
use crate::special::{normal_quantile, normal_quantile_upper, student_t_tail};
use crate::Real;

/// Genes × subjects, row-major. The first `group_split` columns are the
/// control group and the rest the case group.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionMatrix<T> {
    values: Vec<T>,
    genes: usize,
    subjects: usize,
    group_split: usize,
}

impl<T: Real> ExpressionMatrix<T> {
    pub fn new(values: Vec<T>, genes: usize, subjects: usize, group_split: usize) -> Result<Self> {
        if values.len() != genes * subjects {
            return Err(Error::Dimension { expected: genes * subjects, found: values.len() });
        }
        if genes == 0 {
            return Err(Error::Domain("expression matrix has no genes".into()));
        }
        if group_split < 2 || subjects < group_split + 2 {
            return Err(Error::Domain(format!(
                "each group needs at least two subjects (split {group_split} of {subjects})"
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite expression value at gene {}", i / subjects + 1)));
        }
        Ok(Self { values, genes, subjects, group_split })
    }

    pub fn genes(&self) -> usize {
        self.genes
    }

    pub fn subjects(&self) -> usize {
        self.subjects
    }

    pub fn group_split(&self) -> usize {
        self.group_split
    }

    pub fn row(&self, gene: usize) -> &[T] {
        &self.values[gene * self.subjects..(gene + 1) * self.subjects]
    }

    /// Degrees of freedom of the pooled two-sample t statistic.
    pub fn degrees_of_freedom(&self) -> usize {
        self.subjects - 2
    }
}

fn mean_and_ss<T: Real>(x: &[T]) -> (T, T) {
    let mean = x.iter().copied().sum::<T>() / T::count(x.len());
    (mean, x.iter().map(|&v| (v - mean) * (v - mean)).sum())
}

/// Pooled-variance two-sample t statistic per gene, case minus control.
/// Genes with zero pooled variance get t = 0 and are listed in the second
/// return value.
pub fn t_statistics<T: Real>(matrix: &ExpressionMatrix<T>) -> (Vec<T>, Vec<usize>) {
    let n1 = matrix.group_split;
    let n2 = matrix.subjects - n1;
    let scale = (T::one() / T::count(n1) + T::one() / T::count(n2)) / T::count(n1 + n2 - 2);
    let mut constant = Vec::new();
    let t = (0..matrix.genes)
        .map(|g| {
            let row = matrix.row(g);
            let (m1, ss1) = mean_and_ss(&row[..n1]);
            let (m2, ss2) = mean_and_ss(&row[n1..]);
            let s2 = scale * (ss1 + ss2);
            if s2 > T::zero() {
                (m2 - m1) / s2.sqrt()
            } else {
                constant.push(g);
                T::zero()
            }
        })
        .collect();
    if !constant.is_empty() {
        log::warn!("{} gene(s) have zero pooled variance; their statistics are set to 0", constant.len());
    }
    (t, constant)
}

/// `Φ⁻¹(F_t(t; df))`, evaluated through the smaller tail on each side.
pub fn z_transform<T: Real>(t: &[T], df: T) -> Result<ObservationVector<T>> {
    if !(df > T::zero()) {
        return Err(Error::Domain(format!("degrees of freedom must be positive, got {df}")));
    }
    let z = t
        .iter()
        .map(|&ti| {
            if ti == T::zero() {
                T::zero()
            } else if ti > T::zero() {
                normal_quantile_upper(student_t_tail(ti, df))
            } else {
                normal_quantile(student_t_tail(ti, df))
            }
        })
        .collect();
    ObservationVector::new(z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedGene<T> {
    /// One-based row number in the input.
    pub gene: usize,
    pub z: T,
    pub statistic: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneRanking<T> {
    pub procedure: Procedure,
    pub rejections: usize,
    pub xi_hat: Option<T>,
    /// Discoveries, strongest first.
    pub genes: Vec<RankedGene<T>>,
}

impl<T: Real> GeneRanking<T> {
    pub fn top(&self, k: usize) -> &[RankedGene<T>] {
        &self.genes[..k.min(self.genes.len())]
    }

    pub fn contains(&self, gene: usize) -> bool {
        self.genes.iter().any(|g| g.gene == gene)
    }

    fn from_outcome(z: &ObservationVector<T>, out: ProcedureOutcome<T>) -> Self {
        let genes = out
            .ranked_rejections()
            .into_iter()
            .map(|i| RankedGene { gene: i + 1, z: z.values()[i], statistic: out.statistic[i] })
            .collect();
        Self { procedure: out.procedure, rejections: out.decisions.rejections(), xi_hat: out.xi_hat, genes }
    }
}

/// Runs each procedure on the z-scores and ranks its discoveries by the
/// procedure's own statistic: p-value or q-value ascending, locfdr ascending,
/// |β̂| descending for the horseshoe family.
pub fn rank_genes<T: Real>(
    z: &ObservationVector<T>,
    procedures: &[Procedure],
    gamma: T,
    seed: u64,
    config: &ProcedureConfig,
) -> Result<Vec<GeneRanking<T>>> {
    if procedures.is_empty() {
        return Err(Error::Config("no procedures requested".into()));
    }
    procedures
        .iter()
        .map(|&p| {
            if p == Procedure::Oracle {
                return Err(Error::Config("the oracle procedure needs ground truth and cannot rank real data".into()));
            }
            Ok(GeneRanking::from_outcome(z, run_procedure(p, z, gamma, seed, config, None)?))
        })
        .collect()
}

fn parse_value<T: Real>(field: &str, line: usize) -> Result<T> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::Parse { line, message: format!("`{}` is not a number", field.trim()) })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, message: format!("non-finite value `{}`", field.trim()) });
    }
    Ok(T::lit(v))
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(input)
}

fn record_line(record: &csv::StringRecord, fallback: usize) -> usize {
    record.position().map_or(fallback, |p| p.line() as usize)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { line, message: e.to_string() }
}

/// Reads a matrix CSV: a header of per-subject group labels (one label for
/// the leading control block, another for the case block), then one row per
/// gene.
pub fn read_expression_csv<T: Real, R: Read>(input: R) -> Result<ExpressionMatrix<T>> {
    let mut rdr = csv_reader(input);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or(Error::Parse { line: 1, message: "empty input".into() })?
        .map_err(csv_error)?;
    let labels: Vec<&str> = header.iter().collect();
    let split = labels.iter().take_while(|&&l| l == labels[0]).count();
    if split == labels.len() || labels[split..].iter().any(|&l| l != labels[split]) {
        return Err(Error::Parse {
            line: 1,
            message: "header must hold one group label for the first block of subjects and another for the rest".into(),
        });
    }
    let subjects = labels.len();
    let mut values = Vec::new();
    let mut genes = 0;
    for (k, rec) in records.enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = record_line(&rec, k + 2);
        if rec.len() != subjects {
            return Err(Error::Parse { line, message: format!("expected {subjects} fields, found {}", rec.len()) });
        }
        for f in rec.iter() {
            values.push(parse_value(f, line)?);
        }
        genes += 1;
    }
    ExpressionMatrix::new(values, genes, subjects, split)
}

/// Reads one z-score per line. A first line that does not parse as a number
/// is taken as a header.
pub fn read_zscores_csv<T: Real, R: Read>(input: R) -> Result<ObservationVector<T>> {
    let mut rdr = csv_reader(input);
    let mut values = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = record_line(&rec, k + 1);
        if rec.len() != 1 {
            return Err(Error::Parse { line, message: format!("expected one field, found {}", rec.len()) });
        }
        match parse_value(&rec[0], line) {
            Ok(v) => values.push(v),
            Err(_) if k == 0 => continue,
            Err(e) => return Err(e),
        }
    }
    if values.is_empty() {
        return Err(Error::Parse { line: 1, message: "no z-scores found".into() });
    }
    ObservationVector::new(values)
}

/// Either input layout.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisInput<T> {
    Matrix(ExpressionMatrix<T>),
    ZScores(ObservationVector<T>),
}

impl<T: Real> AnalysisInput<T> {
    /// Z-scores, computing them from the matrix when needed.
    pub fn z_scores(&self) -> Result<ObservationVector<T>> {
        match self {
            AnalysisInput::ZScores(z) => Ok(z.clone()),
            AnalysisInput::Matrix(m) => {
                let (t, _) = t_statistics(m);
                z_transform(&t, T::count(m.degrees_of_freedom()))
            }
        }
    }
}

/// Chooses the layout from the width of the first line.
pub fn read_analysis_input<T: Real>(text: &str) -> Result<AnalysisInput<T>> {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.contains(',') {
        read_expression_csv(text.as_bytes()).map(AnalysisInput::Matrix)
    } else {
        read_zscores_csv(text.as_bytes()).map(AnalysisInput::ZScores)
    }
}
