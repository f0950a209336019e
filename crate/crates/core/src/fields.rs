//! Numeric field objects over a chart: scalar fields, vector fields,
//! one-forms, two-forms and (1,1)-tensors.
//!
//! Every object is an immutable closure bundle and is safe to evaluate from
//! many threads.  Components are closed-form wherever a formula is known;
//! a field may additionally carry analytic first derivatives, which the
//! differentiation engine prefers over finite differences (see [`crate::diff`]).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::chart::{Chart, Point};
use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&Point) -> DVector<f64> + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&Point) -> DMatrix<f64> + Send + Sync>;
/// Stack of coordinate partials: entry `c` holds ∂_c of a matrix-valued field.
pub type StackFn = Arc<dyn Fn(&Point) -> Vec<DMatrix<f64>> + Send + Sync>;

/// Rank-3 component array, used for exterior derivatives of two-forms and
/// for the Nijenhuis torsion.  Indexed as `(a, b, c)`.
#[derive(Debug, Clone)]
pub struct Rank3 {
    dim: usize,
    data: Vec<f64>,
}

impl Rank3 {
    pub fn zeros(dim: usize) -> Self {
        Rank3 {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.dim + b) * self.dim + c]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        self.data[(a * self.dim + b) * self.dim + c] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn check_finite_scalar(v: f64, what: &str, x: &Point) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("{what} evaluated to {v} at {x}")))
    }
}

fn check_finite_slice(vals: &[f64], what: &str, x: &Point) -> Result<()> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!(
            "{what} has a non-finite component at {x}"
        )))
    }
}

/// A real-valued field over a chart.
#[derive(Clone)]
pub struct ScalarField {
    chart: Chart,
    eval_fn: ScalarFn,
    grad_fn: Option<VectorFn>,
}

impl ScalarField {
    pub fn new(chart: Chart, f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            chart,
            eval_fn: Arc::new(f),
            grad_fn: None,
        }
    }

    pub fn with_grad(
        chart: Chart,
        f: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Point) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            chart,
            eval_fn: Arc::new(f),
            grad_fn: Some(Arc::new(grad)),
        }
    }

    /// The coordinate function x^i.
    pub fn coordinate(chart: Chart, i: usize) -> Self {
        let dim = chart.dim();
        ScalarField::with_grad(
            chart,
            move |x| x.coord(i),
            move |_| {
                let mut g = DVector::zeros(dim);
                g[i] = 1.0;
                g
            },
        )
    }

    pub fn constant(chart: Chart, c: f64) -> Self {
        let dim = chart.dim();
        ScalarField::with_grad(chart, move |_| c, move |_| DVector::zeros(dim))
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn has_grad(&self) -> bool {
        self.grad_fn.is_some()
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        x.expect_chart(self.chart)?;
        check_finite_scalar((self.eval_fn)(x), "scalar field", x)
    }

    pub(crate) fn eval_raw(&self, x: &Point) -> f64 {
        (self.eval_fn)(x)
    }

    /// Analytic gradient, when the field carries one.
    pub fn grad_analytic(&self, x: &Point) -> Option<Result<DVector<f64>>> {
        let g = self.grad_fn.as_ref()?;
        let v = g(x);
        Some(check_finite_slice(v.as_slice(), "gradient", x).map(|()| v))
    }

    /// Pointwise product; the gradient follows the product rule when both
    /// factors carry analytic gradients.
    pub fn product(&self, other: &ScalarField) -> Result<ScalarField> {
        if self.chart != other.chart {
            return Err(Error::ChartMismatch {
                expected: self.chart,
                got: other.chart,
            });
        }
        let (fa, fb) = (self.eval_fn.clone(), other.eval_fn.clone());
        let eval = move |x: &Point| fa(x) * fb(x);
        match (&self.grad_fn, &other.grad_fn) {
            (Some(ga), Some(gb)) => {
                let (fa2, fb2) = (self.eval_fn.clone(), other.eval_fn.clone());
                let (ga, gb) = (ga.clone(), gb.clone());
                Ok(ScalarField::with_grad(self.chart, eval, move |x| {
                    ga(x) * fb2(x) + gb(x) * fa2(x)
                }))
            }
            _ => Ok(ScalarField::new(self.chart, eval)),
        }
    }
}

/// A vector field; `components` returns the coefficients of ∂/∂x^a.
#[derive(Clone)]
pub struct VectorField {
    chart: Chart,
    comps_fn: VectorFn,
    /// Analytic Jacobian `J[(a, b)] = ∂X^a/∂x^b`, when known.
    jac_fn: Option<MatrixFn>,
}

impl VectorField {
    pub fn new(chart: Chart, f: impl Fn(&Point) -> DVector<f64> + Send + Sync + 'static) -> Self {
        VectorField {
            chart,
            comps_fn: Arc::new(f),
            jac_fn: None,
        }
    }

    pub fn with_jacobian(
        chart: Chart,
        f: impl Fn(&Point) -> DVector<f64> + Send + Sync + 'static,
        jac: impl Fn(&Point) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        VectorField {
            chart,
            comps_fn: Arc::new(f),
            jac_fn: Some(Arc::new(jac)),
        }
    }

    pub fn zero(chart: Chart) -> Self {
        let dim = chart.dim();
        VectorField::with_jacobian(
            chart,
            move |_| DVector::zeros(dim),
            move |_| DMatrix::zeros(dim, dim),
        )
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn has_jacobian(&self) -> bool {
        self.jac_fn.is_some()
    }

    pub fn components(&self, x: &Point) -> Result<DVector<f64>> {
        x.expect_chart(self.chart)?;
        let v = (self.comps_fn)(x);
        check_finite_slice(v.as_slice(), "vector field", x)?;
        Ok(v)
    }

    pub(crate) fn components_raw(&self, x: &Point) -> DVector<f64> {
        (self.comps_fn)(x)
    }

    pub fn jacobian_analytic(&self, x: &Point) -> Option<Result<DMatrix<f64>>> {
        let j = self.jac_fn.as_ref()?;
        let m = j(x);
        Some(check_finite_slice(m.as_slice(), "jacobian", x).map(|()| m))
    }

    /// Directional derivative X(f) when f carries an analytic gradient;
    /// used for exact first-integral checks.
    pub fn apply(&self, f: &ScalarField, x: &Point, eng: &crate::diff::DiffEngine) -> Result<f64> {
        let comps = self.components(x)?;
        let grad = eng.grad(f, x)?;
        Ok(comps.dot(&grad))
    }
}

/// A one-form; `components` returns the coefficients of dx^a.
#[derive(Clone)]
pub struct OneForm {
    chart: Chart,
    comps_fn: VectorFn,
    /// Analytic Jacobian `J[(a, b)] = ∂θ_a/∂x^b`, when known.
    jac_fn: Option<MatrixFn>,
}

impl OneForm {
    pub fn new(chart: Chart, f: impl Fn(&Point) -> DVector<f64> + Send + Sync + 'static) -> Self {
        OneForm {
            chart,
            comps_fn: Arc::new(f),
            jac_fn: None,
        }
    }

    pub fn with_jacobian(
        chart: Chart,
        f: impl Fn(&Point) -> DVector<f64> + Send + Sync + 'static,
        jac: impl Fn(&Point) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        OneForm {
            chart,
            comps_fn: Arc::new(f),
            jac_fn: Some(Arc::new(jac)),
        }
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn has_jacobian(&self) -> bool {
        self.jac_fn.is_some()
    }

    pub fn components(&self, x: &Point) -> Result<DVector<f64>> {
        x.expect_chart(self.chart)?;
        let v = (self.comps_fn)(x);
        check_finite_slice(v.as_slice(), "one-form", x)?;
        Ok(v)
    }

    pub(crate) fn components_raw(&self, x: &Point) -> DVector<f64> {
        (self.comps_fn)(x)
    }

    pub fn jacobian_analytic(&self, x: &Point) -> Option<Result<DMatrix<f64>>> {
        let j = self.jac_fn.as_ref()?;
        let m = j(x);
        Some(check_finite_slice(m.as_slice(), "one-form jacobian", x).map(|()| m))
    }
}

const TWO_FORM_ANTISYMMETRY_TOL: f64 = 1e-12;

/// A two-form; the component matrix is checked antisymmetric (to 1e-12)
/// at every evaluation.
#[derive(Clone)]
pub struct TwoForm {
    chart: Chart,
    comps_fn: MatrixFn,
    /// Analytic partials: entry c holds ∂_c ω_{ab}.
    partials_fn: Option<StackFn>,
}

impl TwoForm {
    pub fn new(chart: Chart, f: impl Fn(&Point) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        TwoForm {
            chart,
            comps_fn: Arc::new(f),
            partials_fn: None,
        }
    }

    pub fn with_partials(
        chart: Chart,
        f: impl Fn(&Point) -> DMatrix<f64> + Send + Sync + 'static,
        partials: impl Fn(&Point) -> Vec<DMatrix<f64>> + Send + Sync + 'static,
    ) -> Self {
        TwoForm {
            chart,
            comps_fn: Arc::new(f),
            partials_fn: Some(Arc::new(partials)),
        }
    }

    /// Constant-coefficient two-form (all partials vanish).
    pub fn constant(chart: Chart, mat: DMatrix<f64>) -> Self {
        let dim = chart.dim();
        let m2 = mat.clone();
        TwoForm::with_partials(
            chart,
            move |_| mat.clone(),
            move |_| vec![DMatrix::zeros(m2.nrows(), m2.ncols()); dim],
        )
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn has_partials(&self) -> bool {
        self.partials_fn.is_some()
    }

    pub fn components(&self, x: &Point) -> Result<DMatrix<f64>> {
        x.expect_chart(self.chart)?;
        let m = (self.comps_fn)(x);
        check_finite_slice(m.as_slice(), "two-form", x)?;
        let skew = &m + m.transpose();
        if skew.amax() > TWO_FORM_ANTISYMMETRY_TOL {
            return Err(Error::NonFinite(format!(
                "two-form components not antisymmetric at {x} (defect {})",
                skew.amax()
            )));
        }
        Ok(m)
    }

    pub(crate) fn components_raw(&self, x: &Point) -> DMatrix<f64> {
        (self.comps_fn)(x)
    }

    pub fn partials_analytic(&self, x: &Point) -> Option<Result<Vec<DMatrix<f64>>>> {
        let p = self.partials_fn.as_ref()?;
        let stack = p(x);
        for m in &stack {
            if let Err(e) = check_finite_slice(m.as_slice(), "two-form partials", x) {
                return Some(Err(e));
            }
        }
        Some(Ok(stack))
    }
}

/// A (1,1)-tensor field; `components` returns the matrix T^a_b
/// (row = upper index).
#[derive(Clone)]
pub struct Tensor11 {
    chart: Chart,
    comps_fn: MatrixFn,
    /// Analytic partials: entry c holds ∂_c T^a_b.
    partials_fn: Option<StackFn>,
}

impl Tensor11 {
    pub fn new(chart: Chart, f: impl Fn(&Point) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        Tensor11 {
            chart,
            comps_fn: Arc::new(f),
            partials_fn: None,
        }
    }

    pub fn with_partials(
        chart: Chart,
        f: impl Fn(&Point) -> DMatrix<f64> + Send + Sync + 'static,
        partials: impl Fn(&Point) -> Vec<DMatrix<f64>> + Send + Sync + 'static,
    ) -> Self {
        Tensor11 {
            chart,
            comps_fn: Arc::new(f),
            partials_fn: Some(Arc::new(partials)),
        }
    }

    pub fn constant(chart: Chart, mat: DMatrix<f64>) -> Self {
        let dim = chart.dim();
        let m2 = mat.clone();
        Tensor11::with_partials(
            chart,
            move |_| mat.clone(),
            move |_| vec![DMatrix::zeros(m2.nrows(), m2.ncols()); dim],
        )
    }

    pub fn identity(chart: Chart) -> Self {
        Tensor11::constant(chart, DMatrix::identity(chart.dim(), chart.dim()))
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn has_partials(&self) -> bool {
        self.partials_fn.is_some()
    }

    pub fn components(&self, x: &Point) -> Result<DMatrix<f64>> {
        x.expect_chart(self.chart)?;
        let m = (self.comps_fn)(x);
        check_finite_slice(m.as_slice(), "tensor", x)?;
        Ok(m)
    }

    pub(crate) fn components_raw(&self, x: &Point) -> DMatrix<f64> {
        (self.comps_fn)(x)
    }

    pub fn partials_analytic(&self, x: &Point) -> Option<Result<Vec<DMatrix<f64>>>> {
        let p = self.partials_fn.as_ref()?;
        let stack = p(x);
        for m in &stack {
            if let Err(e) = check_finite_slice(m.as_slice(), "tensor partials", x) {
                return Some(Err(e));
            }
        }
        Some(Ok(stack))
    }
}

/// Canonical symplectic form of a chart: ω = Σ d(first) ∧ d(second)
/// over the canonical pairs.
pub fn canonical_two_form(chart: Chart) -> TwoForm {
    let dim = chart.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for &(a, b) in chart.canonical_pairs() {
        m[(a, b)] = 1.0;
        m[(b, a)] = -1.0;
    }
    TwoForm::constant(chart, m)
}

/// Canonical Poisson bivector of a chart, as the matrix Λ^{ab} with
/// X_f = Λ df.  On cotangent-type charts the (q, p) entry is +1 (flow
/// q̇ = +∂f/∂p); on action-type charts the (angle, action) entry is +1
/// (flow angle-rate = +∂f/∂action).
pub fn canonical_bivector(chart: Chart) -> Tensor11 {
    let dim = chart.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for &(a, b) in chart.canonical_pairs() {
        match chart {
            Chart::Cartesian | Chart::Reduced => {
                m[(a, b)] = 1.0;
                m[(b, a)] = -1.0;
            }
            _ => {
                m[(b, a)] = 1.0;
                m[(a, b)] = -1.0;
            }
        }
    }
    Tensor11::constant(chart, m)
}

/// Deformed bivector on the Cartesian chart: the canonical bivector plus the
/// constant block Θ^{ij} = ε^{ij3} α on the position-position entries, so that
/// X_f = Λ_γ df reproduces q̇ⁱ = ∂f/∂pᵢ + Θ^{ij} ∂f/∂qʲ, ṗᵢ = −∂f/∂qⁱ.
pub fn gamma_bivector(alpha: f64) -> Tensor11 {
    let mut m = DMatrix::zeros(6, 6);
    for i in 0..3 {
        m[(i, i + 3)] = 1.0;
        m[(i + 3, i)] = -1.0;
    }
    m[(0, 1)] = alpha;
    m[(1, 0)] = -alpha;
    Tensor11::constant(Chart::Cartesian, m)
}
