use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::forms::CoefficientField;
use crate::{DgError, Point, Result};

type ExactFn = dyn Fn(Point) -> (f64, Point) + Send + Sync;
type SourceFn = dyn Fn(Point) -> f64 + Send + Sync;

/// A coefficient, an exact solution vanishing on the boundary, and the
/// matching source `f = -div(K grad u) + u`.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub k: CoefficientField,
    exact: Arc<ExactFn>,
    source: Arc<SourceFn>,
}

impl fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("name", &self.name)
            .finish()
    }
}

impl ManufacturedCase {
    pub fn new(
        name: impl Into<String>,
        k: CoefficientField,
        exact: impl Fn(Point) -> (f64, Point) + Send + Sync + 'static,
        source: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            k,
            exact: Arc::new(exact),
            source: Arc::new(source),
        }
    }

    pub fn u(&self, x: Point) -> f64 {
        (self.exact)(x).0
    }

    pub fn grad_u(&self, x: Point) -> Point {
        (self.exact)(x).1
    }

    pub fn value_grad(&self, x: Point) -> (f64, Point) {
        (self.exact)(x)
    }

    pub fn f(&self, x: Point) -> f64 {
        (self.source)(x)
    }
}

/// `K = xy`, `u = xy(1-x)(1-y)`.
pub fn paper_case() -> ManufacturedCase {
    ManufacturedCase::new(
        "paper",
        CoefficientField::from_fn("xy", |x| x[0] * x[1]),
        |p| {
            let [x, y] = p;
            let (gx, gy) = (x * (1.0 - x), y * (1.0 - y));
            (gx * gy, [(1.0 - 2.0 * x) * gy, gx * (1.0 - 2.0 * y)])
        },
        |p| {
            let [x, y] = p;
            let div = y * y * (1.0 - y) * (1.0 - 4.0 * x) + x * x * (1.0 - x) * (1.0 - 4.0 * y);
            -div + x * y * (1.0 - x) * (1.0 - y)
        },
    )
}

/// `K = xy + 0.1`, `u = sin(pi x) sin(pi y)`.
pub fn sine_case() -> ManufacturedCase {
    ManufacturedCase::new(
        "sine",
        CoefficientField::from_fn("xy+0.1", |x| x[0] * x[1] + 0.1),
        |p| {
            let (sx, cx) = (PI * p[0]).sin_cos();
            let (sy, cy) = (PI * p[1]).sin_cos();
            (sx * sy, [PI * cx * sy, PI * sx * cy])
        },
        |p| {
            let [x, y] = p;
            let (sx, cx) = (PI * x).sin_cos();
            let (sy, cy) = (PI * y).sin_cos();
            let k = x * y + 0.1;
            // div(K grad u) = grad K . grad u + K lap u, grad K = (y, x)
            let div = y * PI * cx * sy + x * PI * sx * cy - 2.0 * PI * PI * k * sx * sy;
            -div + sx * sy
        },
    )
}

pub fn case_by_name(name: &str) -> Result<ManufacturedCase> {
    match name {
        "paper" => Ok(paper_case()),
        "sine" => Ok(sine_case()),
        other => Err(DgError::Config(format!(
            "unknown case '{other}' (expected paper or sine)"
        ))),
    }
}
