//! JSON geometry files.
//!
//! ```json
//! {
//!   "patches": [
//!     { "degree": 1, "knots_u": [0, 0, 1, 1], "knots_v": [0, 0, 1, 1],
//!       "control_points": [[0, 0], [1, 0], [0, 1], [1, 1]] }
//!   ],
//!   "interfaces": [{ "primary": 1, "secondary": 0 }],
//!   "dirichlet_sides": [{ "patch": 0, "side": "west" }]
//! }
//! ```
//!
//! Control points run with `u` fastest. `degree` is one number or
//! `[p_u, p_v]`; `weights` is optional. `interfaces` only overrides which
//! patch of a detected interface is primary. Without `dirichlet_sides`
//! every boundary side is clamped.

use std::path::Path;

use iga_mortar_core::bspline::KnotVector;
use iga_mortar_core::builtin;
use iga_mortar_core::geometry::{PatchGeometry, TensorSpace2D};
use iga_mortar_core::topology::{build_topology, default_tolerance, MultiPatchTopology, Side, SideRef};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryFile {
    pub patches: Vec<PatchSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interfaces: Vec<InterfaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirichlet_sides: Option<Vec<SideSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    pub degree: DegreeSpec,
    pub knots_u: Vec<f64>,
    pub knots_v: Vec<f64>,
    pub control_points: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DegreeSpec {
    Same(usize),
    PerDirection([usize; 2]),
}

impl DegreeSpec {
    fn pair(self) -> (usize, usize) {
        match self {
            DegreeSpec::Same(p) => (p, p),
            DegreeSpec::PerDirection([a, b]) => (a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceSpec {
    pub primary: usize,
    pub secondary: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideSpec {
    pub patch: usize,
    pub side: String,
}

/// A loaded domain: topology plus the clamped sides (`None` = all).
#[derive(Debug, Clone)]
pub struct Domain {
    pub name: String,
    pub topology: MultiPatchTopology,
    pub dirichlet: Option<Vec<SideRef>>,
}

impl GeometryFile {
    pub fn from_patches(patches: &[PatchGeometry]) -> Self {
        let patches = patches
            .iter()
            .map(|g| PatchSpec {
                degree: DegreeSpec::PerDirection([g.space.u.degree(), g.space.v.degree()]),
                knots_u: g.space.u.knots().to_vec(),
                knots_v: g.space.v.knots().to_vec(),
                control_points: g.control_points.clone(),
                weights: g.weights.clone(),
            })
            .collect();
        GeometryFile {
            patches,
            interfaces: Vec::new(),
            dirichlet_sides: None,
        }
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::GeometryFile {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("geometry serializes")
    }

    pub fn into_domain(self, name: &str) -> Result<Domain> {
        let patches = self
            .patches
            .into_iter()
            .map(|p| {
                let (pu, pv) = p.degree.pair();
                let space = TensorSpace2D::new(KnotVector::new(pu, p.knots_u)?, KnotVector::new(pv, p.knots_v)?);
                PatchGeometry::new(space, p.control_points, p.weights)
            })
            .collect::<iga_mortar_core::Result<Vec<_>>>()?;
        let overrides: Vec<(usize, usize)> = self.interfaces.iter().map(|i| (i.primary, i.secondary)).collect();
        let tol = default_tolerance(&patches);
        let topology = build_topology(patches, tol, &overrides)?;
        let dirichlet = self
            .dirichlet_sides
            .map(|sides| {
                sides
                    .into_iter()
                    .map(|s| {
                        Side::from_name(&s.side)
                            .map(|side| SideRef::new(s.patch, side))
                            .ok_or_else(|| CliError::Config(format!("unknown side name `{}`", s.side)))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        Ok(Domain {
            name: name.to_string(),
            topology,
            dirichlet,
        })
    }
}

/// A built-in name or the path of a geometry file.
pub fn load_domain(spec: &str) -> Result<Domain> {
    if let Some(patches) = builtin::builtin(spec) {
        return Ok(Domain {
            name: spec.to_string(),
            topology: MultiPatchTopology::new(patches)?,
            dirichlet: None,
        });
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    GeometryFile::parse(&text, path)?.into_domain(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_round_trips_through_json() {
        for name in builtin::BUILTIN_NAMES {
            let patches = builtin::builtin(name).unwrap();
            let text = GeometryFile::from_patches(&patches).to_json();
            let back = GeometryFile::parse(&text, Path::new("mem")).unwrap();
            let domain = back.into_domain(name).unwrap();
            assert_eq!(domain.topology.patches, patches);
            let direct = MultiPatchTopology::new(patches).unwrap();
            assert_eq!(domain.topology.interfaces, direct.interfaces);
        }
    }

    #[test]
    fn scalar_degree_and_dirichlet_sides() {
        let text = r#"{
            "patches": [{ "degree": 1, "knots_u": [0, 0, 1, 1], "knots_v": [0, 0, 1, 1],
                          "control_points": [[0, 0], [1, 0], [0, 1], [1, 1]] }],
            "dirichlet_sides": [{ "patch": 0, "side": "west" }, { "patch": 0, "side": "north" }]
        }"#;
        let d = GeometryFile::parse(text, Path::new("mem"))
            .unwrap()
            .into_domain("t")
            .unwrap();
        assert_eq!(d.topology.patches.len(), 1);
        assert_eq!(
            d.dirichlet,
            Some(vec![SideRef::new(0, Side::West), SideRef::new(0, Side::North)])
        );
    }

    #[test]
    fn bad_input_is_classified() {
        let e = GeometryFile::parse("{ \"patches\": 3 }", Path::new("x.json")).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        let text = r#"{ "patches": [{ "degree": 1, "knots_u": [0, 0, 1, 1], "knots_v": [0, 0, 1, 1],
                          "control_points": [[0, 0], [1, 0], [0, 1]] }] }"#;
        let e = GeometryFile::parse(text, Path::new("x.json"))
            .unwrap()
            .into_domain("x")
            .unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert_eq!(load_domain("/nonexistent/geometry.json").unwrap_err().exit_code(), 5);
    }
}
