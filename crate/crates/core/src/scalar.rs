use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar backing the algebraic layers.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Unit roundoff of the type.
    fn unit_roundoff() -> Self {
        Self::epsilon()
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Cplx<T> = Complex<T>;

pub fn cast_complex<T: Real, U: Real>(x: Complex<T>) -> Complex<U> {
    Complex::new(
        U::from_f64(x.re.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(U::nan),
        U::from_f64(x.im.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(U::nan),
    )
}
