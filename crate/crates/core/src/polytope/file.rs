use serde::{Deserialize, Serialize};

use super::{GeometryError, HPolytope, Halfspace, Polytope, VPolytope};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceRecord {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// JSON aspiration: vertices, halfspaces, or both.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AspirationFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfspaces: Option<Vec<HalfspaceRecord>>,
}

impl AspirationFile {
    pub fn from_polytope(p: &Polytope) -> Self {
        Self {
            vertices: Some(p.vertices().to_vec()),
            halfspaces: Some(
                p.halfspaces()
                    .iter()
                    .map(|h| HalfspaceRecord { normal: h.normal.clone(), offset: h.offset })
                    .collect(),
            ),
        }
    }

    /// Derives whichever representation is missing.
    pub fn into_polytope(self) -> Result<Polytope, GeometryError> {
        let hs = |recs: Vec<HalfspaceRecord>| {
            recs.into_iter().map(|r| Halfspace::new(r.normal, r.offset)).collect::<Result<Vec<_>, _>>()
        };
        match (self.vertices, self.halfspaces) {
            (Some(v), Some(h)) => Ok(Polytope::from_parts(VPolytope::new(v)?, HPolytope::new(hs(h)?))),
            (Some(v), None) => Polytope::from_vertices(v),
            (None, Some(h)) => Polytope::from_halfspaces(hs(h)?),
            (None, None) => Err(GeometryError::Empty),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertices_only_round_trip() {
        let f: AspirationFile = serde_json::from_str(r#"{"vertices": [[0,0],[1,0],[0,1]]}"#).unwrap();
        let p = f.into_polytope().unwrap();
        assert_eq!(p.halfspaces().len(), 3);
        let back = AspirationFile::from_polytope(&p);
        let q = back.into_polytope().unwrap();
        assert_eq!(p.vertices(), q.vertices());
        for (a, b) in p.halfspaces().iter().zip(q.halfspaces()) {
            assert!(crate::linalg::max_abs_diff(&a.normal, &b.normal) < 1e-12);
            assert!((a.offset - b.offset).abs() < 1e-12);
        }
    }

    #[test]
    fn halfspaces_only() {
        let f: AspirationFile = serde_json::from_str(
            r#"{"halfspaces": [{"normal":[1],"offset":2},{"normal":[-1],"offset":-1}]}"#,
        )
        .unwrap();
        let p = f.into_polytope().unwrap();
        let mut xs: Vec<f64> = p.vertices().iter().map(|v| v[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, vec![1.0, 2.0]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<AspirationFile>(r#"{"vertices": [[0]], "extra": 1}"#).is_err());
    }

    #[test]
    fn empty_file_is_an_error() {
        assert_eq!(AspirationFile::default().into_polytope(), Err(GeometryError::Empty));
    }
}
