//! Scalar abstraction: the toolkit runs on any float that rustfft can
//! transform. Concrete impls provide a per-thread FFT planner so plans are
//! cached per worker.

use std::cell::RefCell;
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::{FftNum, FftPlanner};

pub trait Scalar:
    Float
    + FloatConst
    + FftNum
    + FromPrimitive
    + NumAssign
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum<Self>
    + Display
    + LowerExp
    + Debug
    + 'static
{
    /// Run `f` with this thread's FFT planner.
    fn with_planner<R>(f: impl FnOnce(&mut FftPlanner<Self>) -> R) -> R;

    fn from_f64c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 conversion")
    }

    fn to_f64c(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("f64 conversion")
    }
}

macro_rules! impl_scalar {
    ($t:ty, $tl:ident) => {
        thread_local! {
            static $tl: RefCell<FftPlanner<$t>> = RefCell::new(FftPlanner::new());
        }

        impl Scalar for $t {
            fn with_planner<R>(f: impl FnOnce(&mut FftPlanner<Self>) -> R) -> R {
                $tl.with(|p| f(&mut p.borrow_mut()))
            }
        }
    };
}

impl_scalar!(f32, PLANNER_F32);
impl_scalar!(f64, PLANNER_F64);
