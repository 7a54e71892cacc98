use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{MultilinearPoly, SubsetIndex};
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldSpec};

/// One `{"S": [...], "alpha": ...}` entry of a polynomial file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeffEntry {
    #[serde(rename = "S")]
    pub subset: Vec<usize>,
    pub alpha: u32,
}

/// On-disk form of a [`MultilinearPoly`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyFile {
    pub field: FieldSpec,
    pub n: usize,
    pub d: usize,
    pub coeffs: Vec<CoeffEntry>,
}

impl PolyFile {
    /// Nonzero coefficients in canonical subset order.
    pub fn from_poly(f: &MultilinearPoly) -> Self {
        PolyFile {
            field: f.field().spec(),
            n: f.num_vars(),
            d: f.degree_bound(),
            coeffs: f
                .terms()
                .map(|(s, a)| CoeffEntry {
                    subset: s.members(),
                    alpha: a.value(),
                })
                .collect(),
        }
    }

    pub fn into_poly(self) -> Result<MultilinearPoly> {
        let ctx = Arc::new(FieldCtx::from_spec(&self.field)?);
        if self.d > self.n {
            return Err(Error::InvalidDegree {
                degree: self.d,
                max: self.n,
            });
        }
        let mut f = MultilinearPoly::zero(ctx.clone(), self.n, self.d)?;
        let mut seen = HashSet::new();
        for entry in &self.coeffs {
            let s = SubsetIndex::from_members(&entry.subset)?;
            if !seen.insert(s) {
                return Err(Error::Parse(format!("duplicate subset {:?}", entry.subset)));
            }
            if s.len() > self.d {
                return Err(Error::InvalidDegree {
                    degree: s.len(),
                    max: self.d,
                });
            }
            f.set(s, ctx.elem(entry.alpha)?)?;
        }
        Ok(f)
    }
}

impl MultilinearPoly {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&PolyFile::from_poly(self)).expect("polynomial files always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<PolyFile>(text)?.into_poly()
    }
}
