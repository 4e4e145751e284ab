use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::families::{
    CauchyLocation, ExponentialScale, FamilyRef, GaussianLocation, GaussianLocationScale,
    HalfGaussianScale, Poisson, TruncatedGaussianLocation, Weibull,
};

/// Fixed hyperparameters of a family, e.g. `{"sigma0": 1.0}`.
pub type Hyperparameters = BTreeMap<String, f64>;

type Constructor = Arc<dyn Fn(&Hyperparameters) -> Result<FamilyRef> + Send + Sync>;

/// Maps string ids to family constructors.
#[derive(Clone)]
pub struct FamilyRegistry {
    constructors: BTreeMap<String, Constructor>,
}

/// Reads the allowed keys, rejecting anything else.
fn read(hyper: &Hyperparameters, allowed: &[&str]) -> Result<Vec<Option<f64>>> {
    if let Some(key) = hyper.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::validation(
            format!("family.params.{key}"),
            format!("unknown hyperparameter (allowed: {})", allowed.join(", ")),
        ));
    }
    Ok(allowed.iter().map(|k| hyper.get(*k).copied()).collect())
}

fn positive(key: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::validation(format!("family.params.{key}"), "must be positive and finite"))
    }
}

impl FamilyRegistry {
    pub fn empty() -> Self {
        FamilyRegistry {
            constructors: BTreeMap::new(),
        }
    }

    /// Registry holding every built-in family.
    pub fn builtin() -> Self {
        let mut r = FamilyRegistry::empty();
        r.register("gauss_loc", |h| {
            let v = read(h, &["sigma0"])?;
            Ok(Arc::new(GaussianLocation::new(positive("sigma0", v[0].unwrap_or(1.0))?)))
        });
        r.register("gauss_loc_scale", |h| {
            read(h, &[])?;
            Ok(Arc::new(GaussianLocationScale::new()))
        });
        r.register("exp_scale", |h| {
            read(h, &[])?;
            Ok(Arc::new(ExponentialScale::new()))
        });
        r.register("cauchy_loc", |h| {
            let v = read(h, &["gamma"])?;
            Ok(Arc::new(CauchyLocation::new(positive("gamma", v[0].unwrap_or(1.0))?)))
        });
        r.register("weibull", |h| {
            let v = read(h, &["shape"])?;
            Ok(match v[0] {
                Some(k) => Arc::new(Weibull::with_shape(positive("shape", k)?)),
                None => Arc::new(Weibull::free_shape()),
            })
        });
        r.register("poisson", |h| {
            read(h, &[])?;
            Ok(Arc::new(Poisson::new()))
        });
        r.register("trunc_gauss_loc", |h| {
            let v = read(h, &["sigma0", "lower"])?;
            let lower = v[1].unwrap_or(0.0);
            if !lower.is_finite() {
                return Err(Error::validation("family.params.lower", "must be finite"));
            }
            Ok(Arc::new(TruncatedGaussianLocation::new(
                positive("sigma0", v[0].unwrap_or(1.0))?,
                lower,
            )))
        });
        r.register("half_gauss_scale", |h| {
            read(h, &[])?;
            Ok(Arc::new(HalfGaussianScale::new()))
        });
        r
    }

    /// Adds (or replaces) a constructor under `id`.
    pub fn register(
        &mut self,
        id: &str,
        constructor: impl Fn(&Hyperparameters) -> Result<FamilyRef> + Send + Sync + 'static,
    ) {
        self.constructors.insert(id.to_owned(), Arc::new(constructor));
    }

    pub fn build(&self, id: &str, hyper: &Hyperparameters) -> Result<FamilyRef> {
        let ctor = self.constructors.get(id).ok_or_else(|| {
            Error::validation(
                "family.id",
                format!("unknown family `{id}` (known: {})", self.ids().join(", ")),
            )
        })?;
        ctor(hyper)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.constructors.keys().map(String::as_str).collect()
    }
}

impl Default for FamilyRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl fmt::Debug for FamilyRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.constructors.keys()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_every_required_id() {
        let r = FamilyRegistry::builtin();
        for id in [
            "gauss_loc",
            "gauss_loc_scale",
            "exp_scale",
            "cauchy_loc",
            "weibull",
            "poisson",
            "trunc_gauss_loc",
        ] {
            let f = r.build(id, &Hyperparameters::new()).unwrap();
            assert_eq!(f.id(), id);
        }
    }

    #[test]
    fn unknown_key_is_rejected_with_field_name() {
        let r = FamilyRegistry::builtin();
        let mut h = Hyperparameters::new();
        h.insert("sigma".into(), 1.0);
        match r.build("gauss_loc", &h) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "family.params.sigma"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn weibull_shape_hyperparameter_fixes_dimension() {
        let r = FamilyRegistry::builtin();
        let mut h = Hyperparameters::new();
        assert_eq!(r.build("weibull", &h).unwrap().dim(), 2);
        h.insert("shape".into(), 2.0);
        assert_eq!(r.build("weibull", &h).unwrap().dim(), 1);
    }

    #[test]
    fn custom_registration() {
        let mut r = FamilyRegistry::empty();
        r.register("my_exp", |_| Ok(Arc::new(ExponentialScale::new())));
        assert!(r.build("my_exp", &Hyperparameters::new()).is_ok());
        assert!(r.build("gauss_loc", &Hyperparameters::new()).is_err());
    }
}
