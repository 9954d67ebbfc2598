//! Randomized interpolation: independent bases of (semi-)invariants, kernels
//! of evaluation matrices at points of the secant variety, and quotients by
//! products of known equations.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use log::{debug, info, warn};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characters::{dim_u, dim_u_sgn, dim_u_sym};
use crate::error::{invalid, Error, Result};
use crate::invariant::{InvariantSpec, PointFunction, Symmetrization};
use crate::linalg::{echelon_mod_p, exact_rank, nullspace_rational, transpose};
use crate::polynomial::{Monomial, SparsePolynomial};
use crate::rng::{stream, task_rng, TaskRng};
use crate::scalar::{format_rational, parse_rational, random_prime, rational_reconstruct, rational_to_residue, residue};
use crate::tableau::{random_quintuple, FACTORS};
use crate::tensor::{sample_generic, sample_secant, DenseTensor, GENERIC_HEIGHT, SECANT_HEIGHT};

pub const MODULAR_BITS: u32 = 60;
/// Points beyond the basis size used for kernels and span tests.
pub const POINT_MARGIN: usize = 6;
pub const FRESH_CHECK_POINTS: usize = 10;
pub const CANDIDATE_FACTOR: usize = 50;
/// Draws of quintuples vanishing identically (screened at one point) allowed per target dimension.
pub const ZERO_DRAW_FACTOR: usize = 1000;
pub const INTERPOLATION_MAX_DEGREE: usize = 6;
/// Primes for monomial interpolation stay below 2^28 so elimination can
/// postpone reductions.
const INTERPOLATION_BITS: u32 = 27;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Full,
    Sym,
    Sgn,
}

impl Symmetry {
    pub fn symmetrization(self) -> Symmetrization {
        match self {
            Symmetry::Full => Symmetrization::None,
            Symmetry::Sym => Symmetrization::Sum,
            Symmetry::Sgn => Symmetrization::Signed,
        }
    }

    /// Dimension of the matching space of degree-`d` invariants.
    pub fn target_dim(self, d: usize) -> usize {
        (match self {
            Symmetry::Full => dim_u(d),
            Symmetry::Sym => dim_u_sym(d),
            Symmetry::Sgn => dim_u_sgn(d),
        }) as usize
    }

    /// Symmetry of a product of semi-invariants.
    pub fn times(self, other: Symmetry) -> Symmetry {
        match (self, other) {
            (Symmetry::Full, _) | (_, Symmetry::Full) => Symmetry::Full,
            (a, b) if a == b => Symmetry::Sym,
            _ => Symmetry::Sgn,
        }
    }
}

impl FromStr for Symmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Symmetry::Full),
            "sym" => Ok(Symmetry::Sym),
            "sgn" => Ok(Symmetry::Sgn),
            _ => Err(invalid(format!("unknown symmetry {s:?} (full, sym, sgn)"))),
        }
    }
}

impl std::fmt::Display for Symmetry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Symmetry::Full => "full",
            Symmetry::Sym => "sym",
            Symmetry::Sgn => "sgn",
        })
    }
}

/// How ranks are computed: random 60-bit primes with exact confirmation,
/// exact arithmetic only, or a fixed list of primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModulusPolicy {
    Auto,
    Exact,
    Primes(Vec<u64>),
}

impl FromStr for ModulusPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(ModulusPolicy::Auto),
            "exact" => Ok(ModulusPolicy::Exact),
            list => {
                let primes = list
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<u64>()
                            .map_err(|_| invalid(format!("bad modulus policy {s:?} (auto, exact or p1,p2,...)")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                for &p in &primes {
                    crate::scalar::PrimeField::new(p)?;
                }
                Ok(ModulusPolicy::Primes(primes))
            }
        }
    }
}

impl std::fmt::Display for ModulusPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModulusPolicy::Auto => f.write_str("auto"),
            ModulusPolicy::Exact => f.write_str("exact"),
            ModulusPolicy::Primes(ps) => {
                let parts: Vec<String> = ps.iter().map(u64::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl Serialize for ModulusPolicy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ModulusPolicy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub modulus: ModulusPolicy,
    pub generic_height: i64,
    pub secant_height: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub checkpoint: Option<PathBuf>,
}

impl SearchConfig {
    pub fn new(seed: u64) -> Self {
        SearchConfig {
            seed,
            modulus: ModulusPolicy::Auto,
            generic_height: GENERIC_HEIGHT,
            secant_height: SECANT_HEIGHT,
            checkpoint: None,
        }
    }

    pub fn with_modulus(mut self, modulus: ModulusPolicy) -> Self {
        self.modulus = modulus;
        self
    }

    pub fn with_checkpoint(mut self, dir: impl Into<PathBuf>) -> Self {
        self.checkpoint = Some(dir.into());
        self
    }

    /// `count` primes drawn from the prime stream, skipping the first `skip`.
    fn random_primes(&self, skip: usize, count: usize, bits: u32) -> Vec<u64> {
        let mut rng = task_rng(self.seed, stream::PRIMES + 1000 * bits as u64);
        (0..skip + count).map(|_| random_prime(bits, &mut rng)).skip(skip).collect()
    }

    /// Primes for rank computations, or none for exact-only runs.
    fn rank_primes(&self, count: usize) -> Vec<u64> {
        match &self.modulus {
            ModulusPolicy::Auto => self.random_primes(0, count, MODULAR_BITS),
            ModulusPolicy::Exact => Vec::new(),
            ModulusPolicy::Primes(ps) => ps.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub stream: u64,
    pub points: String,
    pub height: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub prime: Option<u64>,
}

/// `F_i(p_j)` for row functions `F_i` and points `p_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationMatrix {
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    #[serde(with = "integer_matrix")]
    pub entries: Vec<Vec<BigInt>>,
    pub provenance: Provenance,
}

impl EvaluationMatrix {
    pub fn prime(&self) -> Option<u64> {
        self.provenance.prime
    }

    pub fn is_complete(&self) -> bool {
        self.entries.len() == self.row_ids.len() && self.entries.iter().all(|r| r.len() == self.col_ids.len())
    }

    pub fn rank(&self) -> usize {
        match self.prime() {
            Some(p) => {
                let m: Vec<Vec<u64>> = self
                    .entries
                    .iter()
                    .map(|r| r.iter().map(|x| residue(x, p)).collect())
                    .collect();
                echelon_mod_p(m, self.col_ids.len(), p).rank()
            }
            None => exact_rank(&to_rational(&self.entries)),
        }
    }

    /// Completeness, reduced residues and full row rank.
    pub fn verify_full_rank(&self) -> Result<()> {
        if !self.is_complete() {
            return Err(invalid("evaluation matrix has missing entries"));
        }
        if let Some(p) = self.prime() {
            let bound = BigInt::from(p);
            if self.entries.iter().flatten().any(|x| x.sign() == num_bigint::Sign::Minus || *x >= bound) {
                return Err(invalid(format!("entries are not reduced mod {p}")));
            }
        }
        let rank = self.rank();
        if rank != self.row_ids.len() {
            return Err(invalid(format!("rank {rank} below {} rows", self.row_ids.len())));
        }
        Ok(())
    }
}

fn to_rational(m: &[Vec<BigInt>]) -> Vec<Vec<BigRational>> {
    m.iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect()
}

mod integer_matrix {
    use super::*;

    pub fn serialize<S: serde::Serializer>(m: &[Vec<BigInt>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let text: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(BigInt::to_string).collect()).collect();
        text.serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<BigInt>>, D::Error> {
        let text: Vec<Vec<String>> = Vec::deserialize(d)?;
        text.iter()
            .map(|r| r.iter().map(|x| x.parse::<BigInt>().map_err(serde::de::Error::custom)).collect())
            .collect()
    }
}

mod rational_matrix {
    use super::*;

    pub fn serialize<S: serde::Serializer>(m: &[Vec<BigRational>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let text: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(format_rational).collect()).collect();
        text.serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<BigRational>>, D::Error> {
        let text: Vec<Vec<String>> = Vec::deserialize(d)?;
        text.iter()
            .map(|r| r.iter().map(|x| parse_rational(x).map_err(serde::de::Error::custom)).collect())
            .collect()
    }
}

/// Per-entry checkpoint store: one JSON line per finished matrix entry, after
/// a header line identifying the computation.
pub struct EntryStore {
    done: HashMap<(usize, usize), String>,
    writer: Option<Mutex<File>>,
}

#[derive(Serialize, Deserialize)]
struct EntryLine {
    row: usize,
    col: usize,
    value: String,
}

impl EntryStore {
    pub fn memory() -> Self {
        EntryStore {
            done: HashMap::new(),
            writer: None,
        }
    }

    /// Open `dir/label.jsonl`, keeping its entries only if its header matches.
    pub fn open(dir: &Path, label: &str, header: &serde_json::Value) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{label}.jsonl"));
        let header_line = serde_json::to_string(header)?;
        let mut done = HashMap::new();
        let mut fresh = true;
        if path.exists() {
            let mut lines = BufReader::new(File::open(&path)?).lines();
            if lines.next().transpose()?.as_deref() == Some(header_line.as_str()) {
                fresh = false;
                for line in lines {
                    // a torn final line from an interrupted run is dropped
                    match serde_json::from_str::<EntryLine>(&line?) {
                        Ok(e) => {
                            done.insert((e.row, e.col), e.value);
                        }
                        Err(_) => break,
                    }
                }
            } else {
                warn!("checkpoint {} belongs to another run; starting over", path.display());
            }
        }
        let file = if fresh {
            let mut f = File::create(&path)?;
            writeln!(f, "{header_line}")?;
            f
        } else {
            // rewrite so a torn tail is not followed by new lines
            let mut f = File::create(&path)?;
            writeln!(f, "{header_line}")?;
            let mut keys: Vec<_> = done.keys().copied().collect();
            keys.sort_unstable();
            for (row, col) in keys {
                let value = done[&(row, col)].clone();
                writeln!(f, "{}", serde_json::to_string(&EntryLine { row, col, value })?)?;
            }
            f
        };
        info!("checkpoint {}: {} entries restored", path.display(), done.len());
        Ok(EntryStore {
            done,
            writer: Some(Mutex::new(file)),
        })
    }

    pub fn restored(&self) -> usize {
        self.done.len()
    }

    fn get(&self, row: usize, col: usize) -> Option<&String> {
        self.done.get(&(row, col))
    }

    fn record(&self, row: usize, col: usize, value: &str) -> Result<()> {
        if let Some(w) = &self.writer {
            let line = serde_json::to_string(&EntryLine {
                row,
                col,
                value: value.to_string(),
            })?;
            let mut f = w.lock().expect("checkpoint writer");
            writeln!(f, "{line}")?;
            f.flush()?;
        }
        Ok(())
    }
}

fn open_store(config: &SearchConfig, label: &str, header: serde_json::Value) -> Result<EntryStore> {
    match &config.checkpoint {
        Some(dir) => EntryStore::open(dir, label, &header),
        None => Ok(EntryStore::memory()),
    }
}

/// Evaluate every function at every point, in parallel, reusing and recording
/// checkpointed entries. Exact values when `prime` is `None`.
pub fn evaluate_entries(
    functions: &[&dyn PointFunction],
    points: &[DenseTensor],
    prime: Option<u64>,
    store: &EntryStore,
) -> Result<Vec<Vec<BigRational>>> {
    let cols = points.len();
    let cells: Vec<(usize, usize)> = (0..functions.len())
        .flat_map(|i| (0..cols).map(move |j| (i, j)))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(i, j)| {
            if let Some(v) = store.get(i, j) {
                return parse_rational(v);
            }
            let v = match prime {
                Some(p) => BigRational::from_integer(functions[i].eval_mod(&points[j], p)?.into()),
                None => functions[i].eval_exact(&points[j])?,
            };
            store.record(i, j, &format_rational(&v))?;
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut it = values.into_iter();
    Ok((0..functions.len()).map(|_| it.by_ref().take(cols).collect()).collect())
}

fn integer_entries(m: Vec<Vec<BigRational>>) -> Result<Vec<Vec<BigInt>>> {
    m.into_iter()
        .map(|r| {
            r.into_iter()
                .map(|x| {
                    if x.is_integer() {
                        Ok(x.to_integer())
                    } else {
                        Err(invalid("evaluation matrix entries must be integers"))
                    }
                })
                .collect()
        })
        .collect()
}

fn generic_points(config: &SearchConfig, task: u64, count: usize) -> Vec<DenseTensor> {
    let mut rng = task_rng(config.seed, task);
    (0..count)
        .map(|_| sample_generic(FACTORS, config.generic_height, &mut rng))
        .collect()
}

fn secant_points(config: &SearchConfig, task: u64, r: usize, count: usize) -> Vec<DenseTensor> {
    let mut rng = task_rng(config.seed, task);
    (0..count)
        .map(|_| sample_secant(r, FACTORS, config.secant_height, &mut rng))
        .collect()
}

fn ids(prefix: &str, count: usize) -> Vec<String> {
    (0..count).map(|i| format!("{prefix}{i}")).collect()
}

/// Rows kept in echelon form mod p while vectors are offered one at a time.
struct IncrementalEchelon {
    p: u64,
    rows: Vec<(usize, Vec<u64>)>,
}

impl IncrementalEchelon {
    fn new(p: u64) -> Self {
        IncrementalEchelon { p, rows: Vec::new() }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Whether `v` is independent of the rows so far; if so it is kept.
    fn insert(&mut self, mut v: Vec<u64>) -> bool {
        let p = self.p;
        for (pivot, row) in &self.rows {
            let f = v[*pivot];
            if f != 0 {
                for (x, y) in v.iter_mut().zip(row) {
                    *x = crate::scalar::sub_mod(*x, crate::scalar::mul_mod(f, *y, p), p);
                }
            }
        }
        let Some(pivot) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = crate::scalar::inv_mod(v[pivot], p);
        for x in v.iter_mut() {
            *x = crate::scalar::mul_mod(*x, inv, p);
        }
        self.rows.push((pivot, v));
        true
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisResult {
    pub degree: usize,
    pub symmetry: Symmetry,
    pub target: usize,
    pub basis: Vec<InvariantSpec>,
    pub candidates_tried: usize,
    pub discarded: usize,
    pub vanishing_draws: usize,
    pub matrix: EvaluationMatrix,
    /// Rank of the matrix modulo a second prime, when computed modularly.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub confirmation: Option<(u64, usize)>,
}

impl BasisResult {
    /// Re-check a (possibly deserialized) result.
    pub fn verify(&self) -> Result<()> {
        if self.basis.len() != self.target || self.matrix.row_ids.len() != self.target {
            return Err(invalid(format!(
                "basis has {} elements, expected {}",
                self.basis.len(),
                self.target
            )));
        }
        if self.basis.iter().any(|b| b.degree() != self.degree || b.symmetrization() != self.symmetry.symmetrization()) {
            return Err(invalid("basis element of the wrong degree or symmetry"));
        }
        self.matrix.verify_full_rank()
    }
}

/// Draw random symmetrized standard quintuples until their values at
/// `dim` generic points reach full rank `dim`.
pub fn build_basis(d: usize, symmetry: Symmetry, config: &SearchConfig) -> Result<BasisResult> {
    if d % 2 == 1 || d == 0 {
        return Err(invalid(format!("basis degree must be even and positive, got {d}")));
    }
    let target = symmetry.target_dim(d);
    let points = generic_points(config, stream::BASIS_POINTS, target);
    let col_ids = ids("g", target);
    let primes = match &config.modulus {
        ModulusPolicy::Primes(ps) => ps.clone(),
        _ => config.random_primes(0, 2, MODULAR_BITS),
    };
    let p = primes[0];
    let store = open_store(
        config,
        &format!("basis-d{d}-{symmetry}"),
        serde_json::json!({"kind": "basis", "degree": d, "symmetry": symmetry, "seed": config.seed,
                           "height": config.generic_height, "prime": p}),
    )?;
    let mut rng: TaskRng = task_rng(config.seed, stream::BASIS_CANDIDATES);
    let mut echelon = IncrementalEchelon::new(p);
    let mut basis = Vec::new();
    let mut tried = 0;
    let mut zero_draws = 0;
    let probe = &points[0];
    while echelon.rank() < target {
        if tried == CANDIDATE_FACTOR * target || zero_draws == ZERO_DRAW_FACTOR * target {
            return Err(Error::BasisStalled {
                target,
                reached: echelon.rank(),
                tried,
            });
        }
        let q = random_quintuple(d / 2, &mut rng);
        if crate::invariant::evaluate_quintuple_mod(&q, probe, p)? == 0 {
            zero_draws += 1;
            continue;
        }
        let spec = InvariantSpec::single(q, symmetry.symmetrization());
        let row: Vec<u64> = points
            .par_iter()
            .enumerate()
            .map(|(j, a)| match store.get(tried, j) {
                Some(v) => Ok(rational_to_residue(&parse_rational(v)?, p)?),
                None => {
                    let v = spec.eval_mod(a, p)?;
                    store.record(tried, j, &v.to_string())?;
                    Ok(v)
                }
            })
            .collect::<Result<_>>()?;
        tried += 1;
        if echelon.insert(row) {
            debug!("candidate {tried}: rank {}", echelon.rank());
            basis.push(spec);
        } else {
            debug!("candidate {tried}: discarded");
        }
    }
    info!("degree {d} {symmetry}: {target} invariants from {tried} candidates ({zero_draws} vanishing draws skipped)");

    let functions: Vec<&dyn PointFunction> = basis.iter().map(|b| b as &dyn PointFunction).collect();
    let exact = config.modulus == ModulusPolicy::Exact;
    let matrix_prime = (!exact).then_some(p);
    let entries = integer_entries(evaluate_entries(&functions, &points, matrix_prime, &EntryStore::memory())?)?;
    let matrix = EvaluationMatrix {
        row_ids: ids("F", target),
        col_ids,
        entries,
        provenance: Provenance {
            seed: config.seed,
            stream: stream::BASIS_POINTS,
            points: "generic".into(),
            height: config.generic_height,
            prime: matrix_prime,
        },
    };
    let confirmation = match (exact, primes.get(1)) {
        (false, Some(&q)) => {
            let m = integer_entries(evaluate_entries(&functions, &points, Some(q), &EntryStore::memory())?)?;
            let rank = echelon_mod_p(crate::linalg::reduce_matrix(&m, q), target, q).rank();
            Some((q, rank))
        }
        _ => None,
    };
    let result = BasisResult {
        degree: d,
        symmetry,
        target,
        basis,
        candidates_tried: tried,
        discarded: tried - target,
        vanishing_draws: zero_draws,
        matrix,
        confirmation,
    };
    result.verify()?;
    if let Some((q, rank)) = result.confirmation {
        if rank != target {
            return Err(Error::RankInstability(vec![(p, target), (q, rank)]));
        }
    }
    Ok(result)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModularDim {
    pub prime: u64,
    pub kernel_dim: usize,
}

/// Kernel of an evaluation matrix at points of the secant variety.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelCertificate {
    pub degree: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub symmetry: Option<Symmetry>,
    pub secant_rank: usize,
    pub num_points: usize,
    pub basis_ids: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub basis: Vec<InvariantSpec>,
    pub kernel_dim: usize,
    #[serde(with = "rational_matrix")]
    pub vectors: Vec<Vec<BigRational>>,
    pub modular_dims: Vec<ModularDim>,
    pub exact_matrix: bool,
    pub fresh_points_checked: usize,
    pub provenance: Provenance,
}

/// `Σ c_i F_i` as a point function.
pub struct Combination<'a> {
    pub functions: Vec<&'a dyn PointFunction>,
    pub coeffs: Vec<BigRational>,
}

impl PointFunction for Combination<'_> {
    fn degree(&self) -> usize {
        self.functions.first().map_or(0, |f| f.degree())
    }

    fn eval_exact(&self, a: &DenseTensor) -> Result<BigRational> {
        let mut total = BigRational::zero();
        for (f, c) in self.functions.iter().zip(&self.coeffs) {
            if !c.is_zero() {
                total += c * f.eval_exact(a)?;
            }
        }
        Ok(total)
    }

    fn eval_mod(&self, a: &DenseTensor, p: u64) -> Result<u64> {
        let mut total = 0u64;
        for (f, c) in self.functions.iter().zip(&self.coeffs) {
            if !c.is_zero() {
                let v = crate::scalar::mul_mod(rational_to_residue(c, p)?, f.eval_mod(a, p)?, p);
                total = crate::scalar::add_mod(total, v, p);
            }
        }
        Ok(total)
    }
}

/// `f · g` as a point function; `g = None` is the constant 1.
pub struct Product<'a> {
    pub left: &'a dyn PointFunction,
    pub right: Option<&'a dyn PointFunction>,
}

impl PointFunction for Product<'_> {
    fn degree(&self) -> usize {
        self.left.degree() + self.right.map_or(0, |g| g.degree())
    }

    fn eval_exact(&self, a: &DenseTensor) -> Result<BigRational> {
        let v = self.left.eval_exact(a)?;
        match self.right {
            Some(g) if !v.is_zero() => Ok(v * g.eval_exact(a)?),
            _ => Ok(v),
        }
    }

    fn eval_mod(&self, a: &DenseTensor, p: u64) -> Result<u64> {
        let v = self.left.eval_mod(a, p)?;
        match self.right {
            Some(g) if v != 0 => Ok(crate::scalar::mul_mod(v, g.eval_mod(a, p)?, p)),
            _ => Ok(v),
        }
    }
}

fn left_kernel_dim_mod(m: &[Vec<BigInt>], p: u64) -> usize {
    let rows = m.len();
    let t: Vec<Vec<u64>> = transpose(m).iter().map(|r| r.iter().map(|x| residue(x, p)).collect()).collect();
    rows - echelon_mod_p(t, rows, p).rank()
}

/// Modular kernel dimensions for `primes`; ok when they all agree.
fn modular_dims(
    functions: &[&dyn PointFunction],
    points: &[DenseTensor],
    primes: &[u64],
    store_for: &dyn Fn(u64) -> Result<EntryStore>,
) -> Result<Vec<ModularDim>> {
    primes
        .iter()
        .map(|&p| {
            let m = integer_entries(evaluate_entries(functions, points, Some(p), &store_for(p)?)?)?;
            Ok(ModularDim {
                prime: p,
                kernel_dim: left_kernel_dim_mod(&m, p),
            })
        })
        .collect()
}

fn agree(dims: &[ModularDim]) -> bool {
    dims.windows(2).all(|w| w[0].kernel_dim == w[1].kernel_dim)
}

/// Every vector vanishes exactly at `checks` fresh secant points and is
/// nonzero at some generic tensor.
fn verify_kernel_vectors(
    functions: &[&dyn PointFunction],
    vectors: &[Vec<BigRational>],
    r: usize,
    config: &SearchConfig,
) -> Result<()> {
    if vectors.is_empty() {
        return Ok(());
    }
    let fresh = secant_points(config, stream::FRESH_POINTS, r, FRESH_CHECK_POINTS);
    let generic = generic_points(config, stream::GENERIC_CHECK, 3);
    let values = evaluate_entries(functions, &fresh, None, &EntryStore::memory())?;
    let generic_values = evaluate_entries(functions, &generic, None, &EntryStore::memory())?;
    for (k, v) in vectors.iter().enumerate() {
        let at = |vals: &[Vec<BigRational>], j: usize| -> BigRational {
            v.iter()
                .zip(vals)
                .filter(|(c, _)| !c.is_zero())
                .map(|(c, row)| c * &row[j])
                .fold(BigRational::zero(), |a, b| a + b)
        };
        if let Some(j) = (0..fresh.len()).find(|&j| !at(&values, j).is_zero()) {
            return Err(invalid(format!("kernel vector {k} does not vanish at fresh secant point {j}")));
        }
        if (0..generic.len()).all(|j| at(&generic_values, j).is_zero()) {
            return Err(invalid(format!("kernel vector {k} vanishes at every generic check point")));
        }
    }
    Ok(())
}

/// Combinations of `basis` vanishing at `num_points` points of the r-th secant variety.
pub fn kernel_on_variety(
    basis: &[InvariantSpec],
    symmetry: Option<Symmetry>,
    r: usize,
    num_points: usize,
    config: &SearchConfig,
) -> Result<KernelCertificate> {
    let functions: Vec<&dyn PointFunction> = basis.iter().map(|b| b as &dyn PointFunction).collect();
    let degree = basis.first().map_or(0, |b| b.degree());
    let mut cert = kernel_of_functions(&functions, degree, r, num_points, config, "kernel")?;
    cert.symmetry = symmetry;
    cert.basis = basis.to_vec();
    Ok(cert)
}

fn kernel_of_functions(
    functions: &[&dyn PointFunction],
    degree: usize,
    r: usize,
    num_points: usize,
    config: &SearchConfig,
    label: &str,
) -> Result<KernelCertificate> {
    let n = functions.len();
    if num_points < n {
        return Err(invalid(format!("{num_points} points cannot detect the kernel of {n} functions")));
    }
    let points = secant_points(config, stream::VARIETY_POINTS, r, num_points);
    let header = |prime: Option<u64>| {
        serde_json::json!({"kind": label, "degree": degree, "rank": r, "points": num_points, "functions": n,
                           "seed": config.seed, "height": config.secant_height, "prime": prime})
    };
    let store_for = |p: u64| open_store(config, &format!("{label}-d{degree}-r{r}-p{p}"), header(Some(p)));

    let mut dims = modular_dims(functions, &points, &config.rank_primes(3), &store_for)?;
    if !agree(&dims) {
        match &config.modulus {
            ModulusPolicy::Primes(_) => {
                return Err(Error::RankInstability(dims.iter().map(|d| (d.prime, d.kernel_dim)).collect()));
            }
            _ => {
                warn!("modular kernel dimensions disagree {dims:?}; retrying with new primes");
                dims = modular_dims(functions, &points, &config.random_primes(3, 3, MODULAR_BITS), &store_for)?;
            }
        }
    }

    let (vectors, exact_matrix) = match &config.modulus {
        ModulusPolicy::Primes(ps) => (reconstruct_kernel(functions, &points, ps, &store_for)?, false),
        _ => {
            let store = open_store(config, &format!("{label}-d{degree}-r{r}-exact"), header(None))?;
            let m = evaluate_entries(functions, &points, None, &store)?;
            (nullspace_rational(&transpose(&m), n), true)
        }
    };
    if exact_matrix && !agree(&dims) {
        warn!("modular kernel dimensions still disagree {dims:?}; exact dimension {}", vectors.len());
    }
    verify_kernel_vectors(functions, &vectors, r, config)?;
    Ok(KernelCertificate {
        degree,
        symmetry: None,
        secant_rank: r,
        num_points,
        basis_ids: ids("F", n),
        basis: Vec::new(),
        kernel_dim: vectors.len(),
        vectors,
        modular_dims: dims,
        exact_matrix,
        fresh_points_checked: FRESH_CHECK_POINTS,
        provenance: Provenance {
            seed: config.seed,
            stream: stream::VARIETY_POINTS,
            points: format!("secant rank {r}"),
            height: config.secant_height,
            prime: None,
        },
    })
}

/// Kernel basis mod the first prime, lifted to Q and checked mod the others.
fn reconstruct_kernel(
    functions: &[&dyn PointFunction],
    points: &[DenseTensor],
    primes: &[u64],
    store_for: &dyn Fn(u64) -> Result<EntryStore>,
) -> Result<Vec<Vec<BigRational>>> {
    let n = functions.len();
    let p = primes[0];
    let m = integer_entries(evaluate_entries(functions, points, Some(p), &store_for(p)?)?)?;
    let t: Vec<Vec<u64>> = transpose(&m).iter().map(|r| r.iter().map(|x| residue(x, p)).collect()).collect();
    let vectors = lift_vectors(&echelon_mod_p(t, n, p).nullspace(), p)?;
    for &q in &primes[1..] {
        let m = integer_entries(evaluate_entries(functions, points, Some(q), &store_for(q)?)?)?;
        for v in &vectors {
            let coeffs: Vec<u64> = v.iter().map(|c| rational_to_residue(c, q)).collect::<Result<_>>()?;
            for j in 0..points.len() {
                let s = (0..n).fold(0u64, |acc, i| {
                    crate::scalar::add_mod(acc, crate::scalar::mul_mod(coeffs[i], residue(&m[i][j], q), q), q)
                });
                if s != 0 {
                    return Err(invalid(format!("reconstructed kernel vector fails modulo {q}")));
                }
            }
        }
    }
    Ok(vectors)
}

fn lift_vectors(vectors: &[Vec<u64>], p: u64) -> Result<Vec<Vec<BigRational>>> {
    vectors
        .iter()
        .map(|v| {
            v.iter()
                .map(|&x| {
                    rational_reconstruct(x, p)
                        .ok_or_else(|| invalid(format!("no rational reconstruction of {x} mod {p}")))
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuotientStatus {
    Determinate,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientReport {
    pub status: QuotientStatus,
    pub kernel_dim: usize,
    pub cofactor_degree: usize,
    pub cofactor_symmetry: Symmetry,
    pub products_dim: usize,
    pub intersection_dim: usize,
    pub new_generators: usize,
    /// Kernel vectors (over the certificate basis) spanning a complement of the products.
    #[serde(with = "rational_matrix")]
    pub representatives: Vec<Vec<BigRational>>,
    /// `(rank of kernel, rank of products, joint rank)` on each point set.
    pub ranks: Vec<(usize, usize, usize)>,
    pub num_points: usize,
}

/// How many kernel elements are not of the form `known · c` with `c` a
/// semi-invariant of degree `cofactor_degree` of the matching symmetry.
pub fn quotient_by_products(
    kernel: &KernelCertificate,
    known: &dyn PointFunction,
    known_symmetry: Symmetry,
    cofactor_degree: usize,
    config: &SearchConfig,
) -> Result<QuotientReport> {
    let kernel_symmetry = kernel.symmetry.unwrap_or(Symmetry::Full);
    let cofactor_symmetry = kernel_symmetry.times(known_symmetry);
    if known.degree() + cofactor_degree != kernel.degree {
        return Err(invalid(format!(
            "degree {} + {cofactor_degree} does not match kernel degree {}",
            known.degree(),
            kernel.degree
        )));
    }
    let cofactors: Vec<InvariantSpec> = if cofactor_degree == 0 || cofactor_symmetry.target_dim(cofactor_degree) == 0 {
        Vec::new()
    } else {
        build_basis(cofactor_degree, cofactor_symmetry, config)?.basis
    };
    let mut products: Vec<Product> = cofactors
        .iter()
        .map(|c| Product {
            left: known,
            right: Some(c as &dyn PointFunction),
        })
        .collect();
    if cofactor_degree == 0 && cofactor_symmetry != Symmetry::Sgn {
        products.push(Product { left: known, right: None });
    }

    let basis_fns: Vec<&dyn PointFunction> = kernel.basis.iter().map(|b| b as &dyn PointFunction).collect();
    let kernel_fns: Vec<Combination> = kernel
        .vectors
        .iter()
        .map(|v| Combination {
            functions: basis_fns.clone(),
            coeffs: v.clone(),
        })
        .collect();
    let k = kernel_fns.len();
    let s = products.len();
    let num_points = k + s + POINT_MARGIN;
    let mut report = QuotientReport {
        status: QuotientStatus::Determinate,
        kernel_dim: k,
        cofactor_degree,
        cofactor_symmetry,
        products_dim: 0,
        intersection_dim: 0,
        new_generators: 0,
        representatives: Vec::new(),
        ranks: Vec::new(),
        num_points,
    };
    if k == 0 {
        return Ok(report);
    }
    if kernel.basis.is_empty() {
        return Err(invalid("kernel certificate carries no invariant basis"));
    }

    let functions: Vec<&dyn PointFunction> = kernel_fns
        .iter()
        .map(|f| f as &dyn PointFunction)
        .chain(products.iter().map(|f| f as &dyn PointFunction))
        .collect();
    let mut complements = Vec::new();
    for set in 0..2u64 {
        let points = generic_points(config, stream::QUOTIENT_POINTS + 100 * set, num_points);
        let m = evaluate_entries(&functions, &points, None, &EntryStore::memory())?;
        let rk = exact_rank(&m[..k]);
        let rp = exact_rank(&m[k..]);
        let rj = exact_rank(&m);
        report.ranks.push((rk, rp, rj));
        // kernel rows that raise the rank over the products
        let mut current: Vec<Vec<BigRational>> = m[k..].to_vec();
        let mut rank = rp;
        let mut chosen = Vec::new();
        for (i, row) in m[..k].iter().enumerate() {
            current.push(row.clone());
            let next = exact_rank(&current);
            if next > rank {
                rank = next;
                chosen.push(i);
            } else {
                current.pop();
            }
        }
        complements.push(chosen);
    }
    let (rk, rp, rj) = report.ranks[0];
    if report.ranks[0] != report.ranks[1] || rk != k {
        report.status = QuotientStatus::Indeterminate;
    }
    report.products_dim = rp;
    report.intersection_dim = rk + rp - rj;
    report.new_generators = rk - report.intersection_dim;
    report.representatives = complements[0].iter().map(|&i| kernel.vectors[i].clone()).collect();
    Ok(report)
}

/// Monomials of degree `d` in the 32 coordinates whose torus weight
/// (`Σ (2I − 1)` per factor) equals `weight`.
pub fn weight_monomials(d: usize, weight: [i32; FACTORS]) -> Vec<Monomial> {
    fn rec(start: u8, left: usize, w: &mut [i32; FACTORS], cur: &mut Monomial, out: &mut Vec<Monomial>, target: &[i32; FACTORS]) {
        if left == 0 {
            if w == target {
                out.push(cur.clone());
            }
            return;
        }
        for idx in start..32u8 {
            let mut ok = true;
            for (k, wk) in w.iter_mut().enumerate() {
                *wk += 2 * ((idx >> (FACTORS - 1 - k)) & 1) as i32 - 1;
                if (target[k] - *wk).unsigned_abs() as usize > left - 1 {
                    ok = false;
                }
            }
            if ok {
                cur.push(idx);
                rec(idx, left - 1, w, cur, out, target);
                cur.pop();
            }
            for (k, wk) in w.iter_mut().enumerate() {
                *wk -= 2 * ((idx >> (FACTORS - 1 - k)) & 1) as i32 - 1;
            }
        }
    }
    let mut out = Vec::new();
    rec(0, d, &mut [0; FACTORS], &mut Vec::new(), &mut out, &weight);
    out
}

/// Polynomials spanned by monomials of the given torus weight that vanish on
/// the r-th secant variety.
pub fn monomial_interpolation(
    d: usize,
    weight: [i32; FACTORS],
    r: usize,
    config: &SearchConfig,
) -> Result<KernelCertificate> {
    if d > INTERPOLATION_MAX_DEGREE {
        return Err(Error::DegreeGuard {
            max: INTERPOLATION_MAX_DEGREE,
            got: d,
        });
    }
    let monomials = weight_monomials(d, weight);
    let n = monomials.len();
    let num_points = n + POINT_MARGIN;
    let points = secant_points(config, stream::INTERPOLATION, r, num_points);
    let primes = config.random_primes(0, 2, INTERPOLATION_BITS);
    info!("interpolating {n} monomials of degree {d} at {num_points} rank-{r} points");

    let matrix_mod = |p: u64| -> Result<Vec<Vec<u64>>> {
        points
            .par_iter()
            .map(|a| {
                let x: Vec<u64> = a.integer_entries()?.iter().map(|v| residue(v, p)).collect();
                Ok(monomials
                    .iter()
                    .map(|m| m.iter().fold(1u64, |acc, &i| crate::scalar::mul_mod(acc, x[i as usize], p)))
                    .collect())
            })
            .collect()
    };
    let mut dims = Vec::new();
    let mut lifted: Option<Vec<Vec<BigRational>>> = None;
    for &p in &primes {
        let e = echelon_mod_p(matrix_mod(p)?, n, p);
        dims.push(ModularDim {
            prime: p,
            kernel_dim: n - e.rank(),
        });
        let null = e.nullspace();
        match &lifted {
            None => lifted = Some(lift_vectors(&null, p)?),
            Some(vs) => {
                let agrees = vs.len() == null.len()
                    && vs.iter().zip(&null).all(|(v, w)| {
                        v.iter()
                            .zip(w)
                            .all(|(c, &x)| rational_to_residue(c, p).is_ok_and(|y| y == x))
                    });
                if !agrees {
                    return Err(Error::RankInstability(dims.iter().map(|d| (d.prime, d.kernel_dim)).collect()));
                }
            }
        }
    }
    let vectors = lifted.unwrap_or_default();
    let polys: Vec<SparsePolynomial> = vectors.iter().map(|v| polynomial_from(&monomials, v)).collect();
    // exact re-verification at every sample point and at fresh ones
    let fresh = secant_points(config, stream::FRESH_POINTS, r, FRESH_CHECK_POINTS);
    let generic = generic_points(config, stream::GENERIC_CHECK, 3);
    for (k, f) in polys.iter().enumerate() {
        let bad = points
            .par_iter()
            .chain(fresh.par_iter())
            .map(|a| f.evaluate(a).map(|v| v.is_zero()))
            .collect::<Result<Vec<_>>>()?;
        if bad.iter().any(|ok| !ok) {
            return Err(invalid(format!("interpolated polynomial {k} does not vanish exactly")));
        }
        if generic.iter().map(|a| f.evaluate(a)).collect::<Result<Vec<_>>>()?.iter().all(Zero::is_zero) {
            return Err(invalid(format!("interpolated polynomial {k} vanishes at generic points")));
        }
    }
    Ok(KernelCertificate {
        degree: d,
        symmetry: None,
        secant_rank: r,
        num_points,
        basis_ids: monomials.iter().map(|m| SparsePolynomial::key(FACTORS, m)).collect(),
        basis: Vec::new(),
        kernel_dim: vectors.len(),
        vectors,
        modular_dims: dims,
        exact_matrix: false,
        fresh_points_checked: FRESH_CHECK_POINTS,
        provenance: Provenance {
            seed: config.seed,
            stream: stream::INTERPOLATION,
            points: format!("secant rank {r}"),
            height: config.secant_height,
            prime: Some(primes[0]),
        },
    })
}

/// Scale a rational coefficient vector over monomials to an integer polynomial.
pub fn polynomial_from(monomials: &[Monomial], coeffs: &[BigRational]) -> SparsePolynomial {
    let den = coeffs
        .iter()
        .fold(BigInt::one(), |l, c| num_integer::Integer::lcm(&l, c.denom()));
    let d = monomials.first().map_or(0, Vec::len);
    let mut f = SparsePolynomial::zero(FACTORS, d);
    for (m, c) in monomials.iter().zip(coeffs) {
        if !c.is_zero() {
            f.add_term(m.clone(), (c * BigRational::from_integer(den.clone())).to_integer());
        }
    }
    f
}

/// The polynomial of kernel vector `i` of a monomial certificate.
pub fn certificate_polynomial(cert: &KernelCertificate, i: usize) -> Result<SparsePolynomial> {
    let monomials = cert
        .basis_ids
        .iter()
        .map(|key| {
            let parts: Vec<&str> = key.split('.').collect();
            crate::f6::parse_monomial(&parts)
        })
        .collect::<Result<Vec<_>>>()?;
    let v = cert
        .vectors
        .get(i)
        .ok_or_else(|| invalid(format!("certificate has no kernel vector {i}")))?;
    Ok(polynomial_from(&monomials, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f6::construct_f6;
    use crate::tableau::TableauQuintuple;

    #[test]
    fn weight_monomial_counts() {
        // brute force over multisets for small degree
        fn brute(d: usize) -> usize {
            let mut count = 0;
            let mut idx = vec![0u8; d];
            loop {
                let w = SparsePolynomial::monomial_weight(FACTORS, &idx);
                if w.iter().all(|&x| x == 0) {
                    count += 1;
                }
                let mut k = d;
                loop {
                    if k == 0 {
                        return count;
                    }
                    k -= 1;
                    if idx[k] < 31 {
                        idx[k] += 1;
                        let v = idx[k];
                        for x in &mut idx[k..] {
                            *x = v;
                        }
                        break;
                    }
                }
            }
        }
        assert_eq!(weight_monomials(2, [0; 5]).len(), brute(2));
        assert_eq!(weight_monomials(4, [0; 5]).len(), brute(4));
        assert_eq!(weight_monomials(2, [0; 5]).len(), 16);
        assert_eq!(weight_monomials(4, [0; 5]).len(), 336);
        assert_eq!(weight_monomials(1, [1, 1, 1, 1, 1]), vec![vec![31u8]]);
    }

    #[test]
    fn modulus_policy_parsing() {
        assert_eq!("auto".parse::<ModulusPolicy>().unwrap(), ModulusPolicy::Auto);
        assert_eq!("exact".parse::<ModulusPolicy>().unwrap(), ModulusPolicy::Exact);
        assert_eq!(
            "1000003, 998244353".parse::<ModulusPolicy>().unwrap(),
            ModulusPolicy::Primes(vec![1000003, 998244353])
        );
        assert!("12".parse::<ModulusPolicy>().is_err());
        assert!("x".parse::<ModulusPolicy>().is_err());
        let json = serde_json::to_string(&ModulusPolicy::Primes(vec![7, 11])).unwrap();
        assert_eq!(json, "\"7,11\"");
    }

    #[test]
    fn symmetry_products() {
        assert_eq!(Symmetry::Sgn.times(Symmetry::Sgn), Symmetry::Sym);
        assert_eq!(Symmetry::Sym.times(Symmetry::Sgn), Symmetry::Sgn);
        assert_eq!(Symmetry::Sym.times(Symmetry::Full), Symmetry::Full);
    }

    #[test]
    fn incremental_echelon_matches_batch() {
        let p = 1_000_003;
        let mut rng = task_rng(4, 0);
        use rand::Rng;
        let rows: Vec<Vec<u64>> = (0..8)
            .map(|i| {
                if i % 3 == 2 {
                    vec![0; 6]
                } else {
                    (0..6).map(|_| rng.gen_range(0..3)).collect()
                }
            })
            .collect();
        let mut inc = IncrementalEchelon::new(p);
        for r in &rows {
            inc.insert(r.clone());
        }
        assert_eq!(inc.rank(), crate::linalg::rank_mod_p(&rows, p));
    }

    #[test]
    fn basis_degree_six_and_kernel() {
        let config = SearchConfig::new(11);
        let b = build_basis(6, Symmetry::Sgn, &config).unwrap();
        assert_eq!(b.basis.len(), 1);
        let json = serde_json::to_string(&b).unwrap();
        let back: BasisResult = serde_json::from_str(&json).unwrap();
        back.verify().unwrap();
        let cert = kernel_on_variety(&b.basis, Some(Symmetry::Sgn), 5, 1 + POINT_MARGIN, &config).unwrap();
        assert_eq!(cert.kernel_dim, 1);
        assert!(cert.modular_dims.iter().all(|d| d.kernel_dim == 1));
        // the kernel is f6 itself: the quotient by f6 · constants is trivial
        let q = quotient_by_products(&cert, construct_f6(), Symmetry::Sgn, 0, &config).unwrap();
        assert_eq!(q.status, QuotientStatus::Determinate);
        assert_eq!((q.products_dim, q.new_generators), (1, 0));
    }

    #[test]
    fn kernel_is_empty_off_the_variety() {
        let config = SearchConfig::new(12);
        let b = build_basis(6, Symmetry::Sgn, &config).unwrap();
        let cert = kernel_on_variety(&b.basis, Some(Symmetry::Sgn), 6, 7, &config).unwrap();
        assert_eq!(cert.kernel_dim, 0);
    }

    #[test]
    fn prime_list_policy_reconstructs() {
        let config = SearchConfig::new(13).with_modulus("1152921504606846883,2305843009213693951".parse().unwrap());
        let basis = vec![InvariantSpec::single(TableauQuintuple::degree_six(), Symmetrization::Signed)];
        let cert = kernel_on_variety(&basis, None, 5, 8, &config).unwrap();
        assert!(!cert.exact_matrix);
        assert_eq!(cert.kernel_dim, 1);
        assert_eq!(cert.vectors, vec![vec![BigRational::one()]]);
    }

    #[test]
    fn too_few_points_rejected() {
        let config = SearchConfig::new(1);
        let q = InvariantSpec::single(TableauQuintuple::degree_six(), Symmetrization::None);
        assert!(kernel_on_variety(&[q.clone(), q], None, 5, 1, &config).is_err());
        assert!(matches!(
            monomial_interpolation(8, [0; 5], 5, &config),
            Err(Error::DegreeGuard { max: 6, got: 8 })
        ));
        assert!(build_basis(7, Symmetry::Sym, &config).is_err());
    }

    #[test]
    fn interpolation_small_degrees() {
        let config = SearchConfig::new(14);
        assert_eq!(monomial_interpolation(2, [0; 5], 5, &config).unwrap().kernel_dim, 0);
        let c = monomial_interpolation(4, [0; 5], 5, &config).unwrap();
        assert_eq!(c.kernel_dim, 0);
        assert_eq!(c.basis_ids.len(), 336);
    }

    #[test]
    fn checkpoint_resume_gives_identical_matrix() {
        let dir = std::env::temp_dir().join(format!("sigma5-ckpt-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        let config = SearchConfig::new(21).with_checkpoint(&dir);
        let first = build_basis(8, Symmetry::Sym, &config).unwrap();
        let path = dir.join("basis-d8-sym.jsonl");
        let lines = fs::read_to_string(&path).unwrap().lines().count();
        assert_eq!(lines, 1 + first.candidates_tried * first.target);
        // drop the tail and add a torn line, then resume
        let text = fs::read_to_string(&path).unwrap();
        let kept: Vec<&str> = text.lines().take(lines / 2).collect();
        fs::write(&path, format!("{}\n{{\"row\":", kept.join("\n"))).unwrap();
        let store = EntryStore::open(&dir, "basis-d8-sym", &serde_json::json!({"kind": "basis", "degree": 8,
            "symmetry": "sym", "seed": 21, "height": GENERIC_HEIGHT, "prime": first.matrix.prime()})).unwrap();
        assert_eq!(store.restored(), lines / 2 - 1);
        drop(store);
        let second = build_basis(8, Symmetry::Sym, &config).unwrap();
        assert_eq!(first, second);
        assert_eq!(second, build_basis(8, Symmetry::Sym, &SearchConfig::new(21)).unwrap());
        fs::remove_dir_all(&dir).unwrap();
    }
}
