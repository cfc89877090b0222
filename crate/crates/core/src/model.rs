//! Families of balls parameterized by the vertex count, so that one
//! description yields a [`GobSpec`] for every `n` of a scan.

use crate::edges::edge_count;
use crate::error::{Error, Result};
use crate::orlicz::{EdgeComponents, GobSpec, OrliczComponent, RadialDensity};

/// A per-edge parameter given once for all edges or as a full list.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeParam<T> {
    Uniform(T),
    PerEdge(Vec<T>),
}

impl<T: Clone> EdgeParam<T> {
    pub fn resolve(&self, n: usize, what: &str) -> Result<Vec<T>> {
        match self {
            Self::Uniform(v) => Ok(vec![v.clone(); edge_count(n)]),
            Self::PerEdge(vs) if vs.len() == edge_count(n) => Ok(vs.clone()),
            Self::PerEdge(vs) => Err(Error::Domain(format!(
                "{what} list has {} entries but n = {n} needs {}",
                vs.len(),
                edge_count(n)
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelFamily {
    Cube,
    /// `{sum_e c_e x_e <= 1}`
    Simplex { coefficients: EdgeParam<f64> },
    /// `{sum_e (x_e / a_e)^q <= 1}`
    Lq { q: f64, scales: EdgeParam<f64> },
    Gob {
        components: EdgeParam<OrliczComponent>,
        radial: RadialDensity,
    },
}

impl ModelFamily {
    pub fn build(&self, n: usize) -> Result<GobSpec> {
        match self {
            Self::Cube => GobSpec::cube(n),
            Self::Simplex { coefficients } => {
                GobSpec::simplex(n, &coefficients.resolve(n, "simplex coefficient")?)
            }
            Self::Lq { q, scales } => GobSpec::lq(n, *q, &scales.resolve(n, "scale")?),
            Self::Gob { components, radial } => {
                let components = match components {
                    EdgeParam::Uniform(c) => EdgeComponents::Uniform(c.clone()),
                    per_edge => EdgeComponents::PerEdge(per_edge.resolve(n, "component")?),
                };
                GobSpec::new(n, components, *radial)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Cube => "cube",
            Self::Simplex { .. } => "simplex",
            Self::Lq { .. } => "lq",
            Self::Gob { .. } => "gob",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_for_any_n_when_uniform() {
        let f = ModelFamily::Simplex {
            coefficients: EdgeParam::Uniform(1.0),
        };
        assert_eq!(f.build(50).unwrap().dim(), 1225);
        assert_eq!(f.build(4).unwrap().dim(), 6);
    }

    #[test]
    fn per_edge_lists_must_match_n() {
        let f = ModelFamily::Lq {
            q: 2.0,
            scales: EdgeParam::PerEdge(vec![1.0; 3]),
        };
        assert!(f.build(3).is_ok());
        assert!(f.build(4).is_err());
    }
}
