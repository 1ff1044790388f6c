//! Scalar fields, smooth maps, and the derivative operators built on them.
//!
//! A [`ScalarField`] is a real function of chart coordinates evaluated over
//! [`HyperDual`] inputs, so one evaluation yields the value together with
//! seeded first and mixed second derivatives. Fields may additionally carry
//! closed-form first partials; composite constructions that need a
//! derivative inside another differentiated expression (the scaling
//! Hamiltonian, bracket fields) use those instead of nesting dual numbers.

use crate::error::{Error, Result};
use crate::hyperdual::HyperDual;
use crate::matrix::SmallMatrix;
use std::fmt;
use std::sync::Arc;

type FieldFn = Arc<dyn Fn(&[HyperDual]) -> Result<HyperDual> + Send + Sync>;

#[derive(Clone)]
pub struct ScalarField {
    arity: usize,
    eval: FieldFn,
    partials: Option<Arc<Vec<ScalarField>>>,
}

impl ScalarField {
    pub fn new(
        arity: usize,
        eval: impl Fn(&[HyperDual]) -> Result<HyperDual> + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            arity,
            eval: Arc::new(eval),
            partials: None,
        }
    }

    /// Attach closed-form first partials, one field per coordinate.
    pub fn with_partials(mut self, partials: Vec<ScalarField>) -> Self {
        assert_eq!(partials.len(), self.arity, "one partial per coordinate");
        for p in &partials {
            assert_eq!(p.arity, self.arity, "partials live on the same chart");
        }
        self.partials = Some(Arc::new(partials));
        self
    }

    pub fn constant(arity: usize, c: f64) -> Self {
        let f = ScalarField::new(arity, move |_| Ok(HyperDual::constant(c)));
        let partials = (0..arity).map(|_| ScalarField::zero_raw(arity)).collect();
        f.with_partials(partials)
    }

    /// The coordinate function x ↦ xᵢ.
    pub fn coordinate(arity: usize, i: usize) -> Self {
        assert!(i < arity);
        let f = ScalarField::new(arity, move |x| Ok(x[i]));
        let partials = (0..arity)
            .map(|j| {
                let v = if j == i { 1.0 } else { 0.0 };
                ScalarField::zero_raw(arity).shifted(v)
            })
            .collect();
        f.with_partials(partials)
    }

    fn zero_raw(arity: usize) -> Self {
        ScalarField::new(arity, |_| Ok(HyperDual::ZERO))
    }

    fn shifted(self, c: f64) -> Self {
        let inner = self.eval.clone();
        ScalarField {
            arity: self.arity,
            eval: Arc::new(move |x| Ok(inner(x)? + c)),
            partials: None,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn has_partials(&self) -> bool {
        self.partials.is_some()
    }

    pub fn partial(&self, i: usize) -> Result<ScalarField> {
        match &self.partials {
            Some(p) => Ok(p[i].clone()),
            None => Err(Error::MissingPartials { op: "partial" }),
        }
    }

    fn check_arity(&self, got: usize) -> Result<()> {
        if got != self.arity {
            return Err(Error::Arity {
                expected: self.arity,
                got,
            });
        }
        Ok(())
    }

    pub fn eval_dual(&self, x: &[HyperDual]) -> Result<HyperDual> {
        self.check_arity(x.len())?;
        (self.eval)(x)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let lifted: Vec<HyperDual> = x.iter().map(|&v| HyperDual::constant(v)).collect();
        Ok(self.eval_dual(&lifted)?.val)
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("arity", &self.arity)
            .field("has_partials", &self.has_partials())
            .finish()
    }
}

/// Exact gradient, one coordinate direction per dual pass.
pub fn grad(f: &ScalarField, x: &[f64]) -> Result<Vec<f64>> {
    let mut seeds: Vec<HyperDual> = x.iter().map(|&v| HyperDual::constant(v)).collect();
    let mut out = vec![0.0; x.len()];
    for i in 0..x.len() {
        seeds[i].d1 = 1.0;
        out[i] = f.eval_dual(&seeds)?.d1;
        seeds[i].d1 = 0.0;
    }
    Ok(out)
}

/// Directional derivative Df(x)[v] in a single pass.
pub fn directional(f: &ScalarField, x: &[f64], v: &[f64]) -> Result<f64> {
    assert_eq!(x.len(), v.len());
    let seeds: Vec<HyperDual> = x
        .iter()
        .zip(v)
        .map(|(&xi, &vi)| HyperDual::new(xi, vi, 0.0, 0.0))
        .collect();
    Ok(f.eval_dual(&seeds)?.d1)
}

/// Exact mixed second derivative D²f(x)[v, w]. Symmetric in v and w by
/// construction: the mixed slot of the dual arithmetic is.
pub fn second_directional(f: &ScalarField, x: &[f64], v: &[f64], w: &[f64]) -> Result<f64> {
    assert_eq!(x.len(), v.len());
    assert_eq!(x.len(), w.len());
    let seeds: Vec<HyperDual> = (0..x.len())
        .map(|i| HyperDual::new(x[i], v[i], w[i], 0.0))
        .collect();
    Ok(f.eval_dual(&seeds)?.d12)
}

pub fn hessian(f: &ScalarField, x: &[f64]) -> Result<SmallMatrix> {
    let n = x.len();
    let mut h = SmallMatrix::zeros(n, n);
    let mut seeds: Vec<HyperDual> = x.iter().map(|&v| HyperDual::constant(v)).collect();
    for i in 0..n {
        for j in i..n {
            seeds[i].d1 = 1.0;
            seeds[j].d2 = 1.0;
            let hij = f.eval_dual(&seeds)?.d12;
            seeds[i].d1 = 0.0;
            seeds[j].d2 = 0.0;
            h[(i, j)] = hij;
            h[(j, i)] = hij;
        }
    }
    Ok(h)
}

/// A smooth map between charts, one scalar component per output coordinate.
#[derive(Clone)]
pub struct SmoothMap {
    components: Vec<ScalarField>,
}

impl SmoothMap {
    pub fn new(components: Vec<ScalarField>) -> Self {
        assert!(!components.is_empty());
        let arity = components[0].arity();
        for c in &components {
            assert_eq!(c.arity(), arity, "components share the input chart");
        }
        SmoothMap { components }
    }

    pub fn identity(n: usize) -> Self {
        SmoothMap::new((0..n).map(|i| ScalarField::coordinate(n, i)).collect())
    }

    pub fn in_dim(&self) -> usize {
        self.components[0].arity()
    }

    pub fn out_dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.value(x)).collect()
    }

    pub fn apply_dual(&self, x: &[HyperDual]) -> Result<Vec<HyperDual>> {
        self.components.iter().map(|c| c.eval_dual(x)).collect()
    }

    /// Jacobian with rows indexed by outputs and columns by inputs.
    pub fn jacobian(&self, x: &[f64]) -> Result<SmallMatrix> {
        let mut j = SmallMatrix::zeros(self.out_dim(), self.in_dim());
        for (row, c) in self.components.iter().enumerate() {
            let g = grad(c, x)?;
            for (col, v) in g.iter().enumerate() {
                j[(row, col)] = *v;
            }
        }
        Ok(j)
    }

    /// Composition outer ∘ self (apply `self` first).
    pub fn then(&self, outer: &SmoothMap) -> SmoothMap {
        assert_eq!(self.out_dim(), outer.in_dim());
        let inner = self.clone();
        let comps = (0..outer.out_dim())
            .map(|i| {
                let inner = inner.clone();
                let out = outer.components[i].clone();
                ScalarField::new(inner.in_dim(), move |x| {
                    let mid = inner.apply_dual(x)?;
                    out.eval_dual(&mid)
                })
            })
            .collect();
        SmoothMap::new(comps)
    }
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothMap {}->{}", self.in_dim(), self.out_dim())
    }
}
