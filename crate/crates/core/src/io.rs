//! JSON interchange format.
//!
//! A system is an object `{field, n, m, J, H, B}` whose matrices are
//! row-major nested arrays. Real entries are numbers; complex entries are
//! `[re, im]` pairs. Batches of systems are stored one object per line.

use std::io::BufRead;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar, ScalarField};
use crate::system::{Dims, PhtSystem, DEFAULT_STRUCTURE_TOL};
use crate::vectorize::{pack, unpack, PackedVector};

/// A system over either field, as read from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum AnySystem {
    Real(PhtSystem<f64>),
    Complex(PhtSystem<Complex64>),
}

impl From<PhtSystem<f64>> for AnySystem {
    fn from(s: PhtSystem<f64>) -> Self {
        AnySystem::Real(s)
    }
}

impl From<PhtSystem<Complex64>> for AnySystem {
    fn from(s: PhtSystem<Complex64>) -> Self {
        AnySystem::Complex(s)
    }
}

impl AnySystem {
    pub fn field(&self) -> ScalarField {
        match self {
            AnySystem::Real(_) => ScalarField::Real,
            AnySystem::Complex(_) => ScalarField::Complex,
        }
    }

    pub fn dims(&self) -> Dims {
        match self {
            AnySystem::Real(s) => s.dims(),
            AnySystem::Complex(s) => s.dims(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnySystem::Real(s) => system_to_json(s),
            AnySystem::Complex(s) => system_to_json(s),
        }
    }

    pub fn to_json_string(&self) -> String {
        self.to_json().to_string()
    }

    /// Parses and validates with the default structure tolerance.
    pub fn from_json(v: &Value) -> Result<Self> {
        Self::from_json_with_tol(v, DEFAULT_STRUCTURE_TOL)
    }

    pub fn from_json_with_tol(v: &Value, tol: f64) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Format("system must be a JSON object".into()))?;
        let field: ScalarField = get(obj, "field")?
            .as_str()
            .ok_or_else(|| Error::Format("field must be a string".into()))?
            .parse()
            .map_err(Error::Format)?;
        Ok(match field {
            ScalarField::Real => AnySystem::Real(system_from_json(obj, tol)?),
            ScalarField::Complex => AnySystem::Complex(system_from_json(obj, tol)?),
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?)
    }

    pub fn pack(&self) -> PackedVector<f64> {
        match self {
            AnySystem::Real(s) => pack(s),
            AnySystem::Complex(s) => pack(s),
        }
    }

    pub fn unpack(v: &PackedVector<f64>) -> Result<Self> {
        Ok(match v.field {
            ScalarField::Real => AnySystem::Real(unpack(v)?),
            ScalarField::Complex => AnySystem::Complex(unpack(v)?),
        })
    }
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Format(format!("missing key `{key}`")))
}

fn entry_to_json<T: Scalar>(x: T) -> Value {
    let (re, im) = x.parts();
    match T::FIELD {
        ScalarField::Real => json!(re.to_f64_lossy()),
        ScalarField::Complex => json!([re.to_f64_lossy(), im.to_f64_lossy()]),
    }
}

fn matrix_to_json<T: Scalar>(m: &DMatrix<T>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::Array((0..m.ncols()).map(|c| entry_to_json(m[(r, c)])).collect()))
            .collect(),
    )
}

pub fn system_to_json<T: Scalar>(sys: &PhtSystem<T>) -> Value {
    let Dims { n, m } = sys.dims();
    json!({
        "field": T::FIELD,
        "n": n,
        "m": m,
        "J": matrix_to_json(sys.j()),
        "H": matrix_to_json(sys.h()),
        "B": matrix_to_json(sys.b()),
    })
}

fn number(v: &Value, what: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::Format(format!("{what}: expected a number, got {v}")))
}

fn entry_from_json<T: Scalar>(v: &Value, what: &str) -> Result<T> {
    let (re, im) = match (T::FIELD, v) {
        (ScalarField::Real, _) => (number(v, what)?, 0.0),
        (ScalarField::Complex, Value::Array(pair)) if pair.len() == 2 => {
            (number(&pair[0], what)?, number(&pair[1], what)?)
        }
        (ScalarField::Complex, _) => {
            return Err(Error::Format(format!("{what}: expected an [re, im] pair, got {v}")))
        }
    };
    Ok(T::from_parts(crate::linalg::real(re), crate::linalg::real(im)))
}

fn matrix_from_json<T: Scalar>(v: &Value, rows: usize, cols: usize, name: &str) -> Result<DMatrix<T>> {
    let rows_v = v
        .as_array()
        .ok_or_else(|| Error::Format(format!("{name} must be an array of rows")))?;
    if rows_v.len() != rows {
        return Err(Error::DimensionMismatch(format!(
            "{name} has {} rows, expected {rows}",
            rows_v.len()
        )));
    }
    let mut out = DMatrix::<T>::zeros(rows, cols);
    for (r, row) in rows_v.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Format(format!("{name} row {r} must be an array")))?;
        if row.len() != cols {
            return Err(Error::DimensionMismatch(format!(
                "{name} row {r} has {} entries, expected {cols}",
                row.len()
            )));
        }
        for (c, x) in row.iter().enumerate() {
            out[(r, c)] = entry_from_json(x, &format!("{name}[{r}][{c}]"))?;
        }
    }
    Ok(out)
}

fn dim(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    get(obj, key)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Format(format!("`{key}` must be a non-negative integer")))
}

fn system_from_json<T: Scalar>(obj: &Map<String, Value>, tol: f64) -> Result<PhtSystem<T>> {
    let Dims { n, m } = Dims::new(dim(obj, "n")?, dim(obj, "m")?)?;
    let j = matrix_from_json(get(obj, "J")?, n, n, "J")?;
    let h = matrix_from_json(get(obj, "H")?, n, n, "H")?;
    let b = matrix_from_json(get(obj, "B")?, n, m, "B")?;
    PhtSystem::validate(j, h, b, crate::linalg::real(tol))
}

/// Reads one system per non-blank line.
pub fn read_json_lines<R: BufRead>(reader: R) -> Result<Vec<AnySystem>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let sys = AnySystem::from_json_str(&line)
            .map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))?;
        out.push(sys);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctrb::canonical_witness;

    #[test]
    fn real_roundtrip() {
        let w = canonical_witness::<f64>(3, 2).unwrap();
        let any = AnySystem::from(w.base().clone());
        let text = any.to_json_string();
        assert_eq!(AnySystem::from_json_str(&text).unwrap(), any);
    }

    #[test]
    fn complex_roundtrip_uses_pairs() {
        let w = canonical_witness::<Complex64>(2, 1).unwrap();
        let any = AnySystem::from(w.base().clone());
        let v = any.to_json();
        assert!(v["B"][0][0].is_array());
        assert_eq!(AnySystem::from_json(&v).unwrap(), any);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = r#"{"field":"real","n":2,"m":1,"J":[[0,1],[1,0]],"H":[[1,0],[0,1]],"B":[[1],[0]]}"#;
        assert!(matches!(
            AnySystem::from_json_str(bad),
            Err(Error::StructureViolation { matrix: "J", .. })
        ));
        let short = r#"{"field":"real","n":2,"m":1,"J":[[0,1]],"H":[[1,0],[0,1]],"B":[[1],[0]]}"#;
        assert!(matches!(AnySystem::from_json_str(short), Err(Error::DimensionMismatch(_))));
        let missing = r#"{"field":"real","n":2,"m":1}"#;
        assert!(matches!(AnySystem::from_json_str(missing), Err(Error::Format(_))));
        let pairless = r#"{"field":"complex","n":1,"m":1,"J":[[0]],"H":[[[1,0]]],"B":[[[1,0]]]}"#;
        assert!(matches!(AnySystem::from_json_str(pairless), Err(Error::Format(_))));
    }

    #[test]
    fn json_lines() {
        let a = AnySystem::from(canonical_witness::<f64>(2, 1).unwrap().into_base());
        let b = AnySystem::from(canonical_witness::<Complex64>(1, 1).unwrap().into_base());
        let text = format!("{}\n\n{}\n", a.to_json_string(), b.to_json_string());
        let got = read_json_lines(text.as_bytes()).unwrap();
        assert_eq!(got, vec![a, b]);
    }

    #[test]
    fn packed_json_roundtrip() {
        let a = AnySystem::from(canonical_witness::<Complex64>(2, 2).unwrap().into_base());
        let p = a.pack();
        let text = serde_json::to_string(&p).unwrap();
        let back: PackedVector<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(AnySystem::unpack(&back).unwrap(), a);
    }
}
