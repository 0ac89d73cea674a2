use std::path::{Path, PathBuf};

use gwi_core::law::RawLaw;
use gwi_core::model::{validate_model, ModelError, RawModel};
use gwi_core::{BigRational, GwiModel};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Largest denominator used when a float weight is made rational.
pub const MAX_DENOMINATOR: u64 = 1_000_000_000;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("cannot read model file {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{what}: \"{text}\" is not a rational \"num/den\"")]
    BadRational { what: String, text: String },
    #[error("{what}: weight {value} is not a finite number")]
    BadFloat { what: String, value: f64 },
    #[error("invalid model: {0}")]
    Invalid(#[from] ModelError),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelJson {
    p: usize,
    offspring: Vec<LawJson>,
    innovation: LawJson,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LawJson {
    atoms: Vec<AtomJson>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomJson {
    x: Vec<i64>,
    prob: Prob,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Prob {
    Exact(String),
    Float(f64),
}

/// A float weight replaced by a nearby rational.
#[derive(Debug, Clone, PartialEq)]
pub struct Approximation {
    pub law: String,
    pub atom: usize,
    pub given: f64,
    pub rational: BigRational,
}

#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: GwiModel,
    /// Lower-case hex SHA-256 of the file bytes.
    pub hash: String,
    pub approximations: Vec<Approximation>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn load(path: &Path) -> Result<LoadedModel, ModelFileError> {
    let bytes = std::fs::read(path).map_err(|source| ModelFileError::Io { path: path.to_owned(), source })?;
    parse(&bytes)
}

pub fn parse(bytes: &[u8]) -> Result<LoadedModel, ModelFileError> {
    let json: ModelJson = serde_json::from_slice(bytes)?;
    let mut approximations = Vec::new();
    let mut convert = |name: String, law: &LawJson| -> Result<RawLaw, ModelFileError> {
        let mut atoms = Vec::with_capacity(law.atoms.len());
        for (k, atom) in law.atoms.iter().enumerate() {
            let what = format!("{name} atom {k}");
            let prob = match &atom.prob {
                Prob::Exact(text) => parse_rational(text).ok_or_else(|| ModelFileError::BadRational { what, text: text.clone() })?,
                Prob::Float(value) => {
                    if !value.is_finite() {
                        return Err(ModelFileError::BadFloat { what, value: *value });
                    }
                    let rational = nearest_rational(*value, MAX_DENOMINATOR);
                    approximations.push(Approximation { law: name.clone(), atom: k, given: *value, rational: rational.clone() });
                    rational
                }
            };
            atoms.push((atom.x.clone(), prob));
        }
        Ok(RawLaw::new(atoms))
    };
    let offspring = json
        .offspring
        .iter()
        .enumerate()
        .map(|(i, l)| convert(format!("offspring law {}", i + 1), l))
        .collect::<Result<Vec<_>, _>>()?;
    let innovation = convert("innovation law".into(), &json.innovation)?;
    let model = validate_model(&RawModel { p: json.p, offspring, innovation })?;
    Ok(LoadedModel { model, hash: sha256_hex(bytes), approximations })
}

/// `"num/den"` or an integer, with optional surrounding whitespace.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (text.parse::<BigInt>().ok()?, BigInt::one()),
    };
    if den.is_zero() {
        return None;
    }
    Some(BigRational::new(num, den))
}

/// Best rational approximation of `value` with denominator at most
/// `max_den`, from the continued fraction of its exact binary value.
pub fn nearest_rational(value: f64, max_den: u64) -> BigRational {
    let exact = BigRational::from_float(value).expect("finite float");
    let negative = exact.is_negative();
    let target = exact.abs();
    let max_den = BigInt::from(max_den);

    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let (mut num, mut den) = (target.numer().clone(), target.denom().clone());
    loop {
        let (a, r) = num.div_rem(&den);
        let q2 = &a * &q1 + &q0;
        if q2 > max_den {
            // largest semiconvergent still within the bound
            let k = (&max_den - &q0) / &q1;
            let semi = BigRational::new(&k * &p1 + &p0, &k * &q1 + &q0);
            let conv = BigRational::new(p1.clone(), q1.clone());
            let best = if (&semi - &target).abs() < (&conv - &target).abs() { semi } else { conv };
            return if negative { -best } else { best };
        }
        let p2 = &a * &p1 + &p0;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if r.is_zero() {
            let best = BigRational::new(p1, q1);
            return if negative { -best } else { best };
        }
        (num, den) = (den, r);
    }
}
