//! On-disk formats: structure-constant tables for Lie algebras, generator
//! files for finitely generated isometry groups, and geodesic run configs.
//!
//! Algebra files store only the i < j brackets with exact "p/q" rational
//! coefficients; antisymmetry is completed on load.

use crate::discrete::HolonomySpec;
use crate::lie::LieAlgebra;
use crate::rational::Rat;
use crate::{PpError, Result};
use num::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub dim: usize,
    pub labels: Vec<String>,
    pub brackets: Vec<BracketEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    /// basis index (0-based, as a string key) → exact rational "p/q"
    pub coeffs: BTreeMap<String, String>,
}

fn parse_rat(s: &str) -> Result<Rat> {
    Rat::from_str(s).map_err(|_| PpError::Input(format!("bad rational literal {:?}", s)))
}

pub fn algebra_from_file(file: &AlgebraFile) -> Result<LieAlgebra> {
    let mut alg = LieAlgebra::new(file.dim, file.labels.clone());
    if file.labels.len() != file.dim {
        return Err(PpError::Input("label count must equal dim".into()));
    }
    for entry in &file.brackets {
        if entry.i >= file.dim || entry.j >= file.dim {
            return Err(PpError::Input(format!("bracket index out of range: [{},{}]", entry.i, entry.j)));
        }
        let mut coeffs = Vec::new();
        for (k, v) in &entry.coeffs {
            let k: usize = k
                .parse()
                .map_err(|_| PpError::Input(format!("bad basis index key {:?}", k)))?;
            if k >= file.dim {
                return Err(PpError::Input(format!("coefficient index {} out of range", k)));
            }
            coeffs.push((k, parse_rat(v)?));
        }
        alg.set_bracket(entry.i, entry.j, &coeffs);
    }
    Ok(alg)
}

pub fn algebra_to_file(alg: &LieAlgebra) -> AlgebraFile {
    let mut brackets = Vec::new();
    for i in 0..alg.dim {
        for j in i + 1..alg.dim {
            let col = alg.bracket_basis(i, j);
            let mut coeffs = BTreeMap::new();
            for (k, c) in col.iter().enumerate() {
                if !c.is_zero() {
                    coeffs.insert(k.to_string(), c.to_string());
                }
            }
            if !coeffs.is_empty() {
                brackets.push(BracketEntry { i, j, coeffs });
            }
        }
    }
    AlgebraFile { dim: alg.dim, labels: alg.labels.clone(), brackets }
}

pub fn load_algebra(path: &Path) -> Result<LieAlgebra> {
    let text = std::fs::read_to_string(path)?;
    let file: AlgebraFile = serde_json::from_str(&text)?;
    algebra_from_file(&file)
}

pub fn save_algebra(alg: &LieAlgebra, path: &Path) -> Result<()> {
    let file = algebra_to_file(alg);
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Generator files

/// Input for the properness command: either an S₀-subalgebra basis (exact
/// criterion applies) or a plain generator list (sampler).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PropernessInput {
    S0Family { s0_basis: [[f64; 5]; 3] },
    Group(HolonomySpec),
}

pub fn load_generators(path: &Path) -> Result<HolonomySpec> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_properness_input(path: &Path) -> Result<PropernessInput> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn save_generators(spec: &HolonomySpec, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(spec)?)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Geodesic run configs

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeodesicSpec {
    /// chart coordinates (ℓ, α₃, α₄, v) of the start point
    pub start: [f64; 4],
    /// frame components (L, a₃, a₄, V) of the initial velocity
    pub velocity: [f64; 4],
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
}

pub fn load_geodesic_spec(path: &Path) -> Result<GeodesicSpec> {
    let text = std::fs::read_to_string(path)?;
    let spec: GeodesicSpec = serde_json::from_str(&text)?;
    if !(spec.step > 0.0) {
        return Err(PpError::Input("step must be positive".into()));
    }
    if spec.t1 <= spec.t0 {
        return Err(PpError::Input("t-interval is reversed or empty".into()));
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{check_jacobi, heis, osc_s};

    #[test]
    fn algebra_roundtrip() {
        for alg in [heis(2), osc_s()] {
            let file = algebra_to_file(&alg);
            let text = serde_json::to_string(&file).unwrap();
            let back = algebra_from_file(&serde_json::from_str(&text).unwrap()).unwrap();
            assert_eq!(back.dim, alg.dim);
            for i in 0..alg.dim {
                for j in 0..alg.dim {
                    assert_eq!(back.bracket_basis(i, j), alg.bracket_basis(i, j), "[{},{}]", i, j);
                }
            }
            assert!(check_jacobi(&back).passed());
        }
    }

    #[test]
    fn algebra_file_validation() {
        let bad = AlgebraFile {
            dim: 2,
            labels: vec!["a".into(), "b".into()],
            brackets: vec![BracketEntry {
                i: 0,
                j: 5,
                coeffs: BTreeMap::new(),
            }],
        };
        assert!(algebra_from_file(&bad).is_err());
        let bad_rat = AlgebraFile {
            dim: 2,
            labels: vec!["a".into(), "b".into()],
            brackets: vec![BracketEntry {
                i: 0,
                j: 1,
                coeffs: [("1".to_string(), "not-a-number".to_string())].into_iter().collect(),
            }],
        };
        assert!(algebra_from_file(&bad_rat).is_err());
    }

    #[test]
    fn properness_input_untagged() {
        let s0 = r#"{"s0_basis": [[1,0,0,1,0],[0,1,1,0,0],[0,0,0,0,1]]}"#;
        match serde_json::from_str::<PropernessInput>(s0).unwrap() {
            PropernessInput::S0Family { s0_basis } => assert_eq!(s0_basis[2][4], 1.0),
            _ => panic!("expected S0 family"),
        }
        let grp = r#"{"label":"g","generators":[{"flavor":"E","s":1.0,"t":0.0,"xi":[0,0,0,0],"z":0.0}]}"#;
        match serde_json::from_str::<PropernessInput>(grp).unwrap() {
            PropernessInput::Group(spec) => assert_eq!(spec.generators.len(), 1),
            _ => panic!("expected group"),
        }
    }

    #[test]
    fn geodesic_spec_validation() {
        let ok = r#"{"start":[0,0,0,0],"velocity":[1,0,0,0],"t0":0.0,"t1":1.0,"step":0.1}"#;
        let spec: GeodesicSpec = serde_json::from_str(ok).unwrap();
        assert_eq!(spec.velocity[0], 1.0);
    }
}
