//! Exact rational arithmetic helpers.
//!
//! Every `f64` is a dyadic rational, so conversions here are exact; the
//! test suites use this path to check identities without floating-point
//! noise.

use crate::agents::AgentSet;
use crate::instance::Instance;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact conversion; panics on NaN or infinity.
pub fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(|| panic!("non-finite value {x} has no rational form"))
}

pub fn rat_u64(x: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn rat_usize(x: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Exact `(L, R, g)` of a set; `None` encodes minus infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalEval {
    pub l: Option<BigRational>,
    pub r: BigRational,
    pub g: Option<BigRational>,
}

/// Mirrors [`Instance::evaluate`] in exact arithmetic.
pub fn evaluate_exact(inst: &Instance, s: &AgentSet) -> RationalEval {
    let edges = inst.edges_within(s);
    let r = rat_u64(edges) / rat_u64(inst.max_value());
    let mut l = BigRational::one();
    let mut degenerate = false;
    for v in s.iter() {
        let c = inst.cost(v);
        if c == 0.0 {
            continue;
        }
        let d = inst.degree_in(v, s);
        if d == 0 {
            degenerate = true;
            break;
        }
        l -= rat(c) / rat_usize(d);
    }
    if degenerate {
        let g = if edges == 0 { Some(BigRational::zero()) } else { None };
        return RationalEval { l: None, r, g };
    }
    let g = if edges == 0 {
        BigRational::zero()
    } else {
        &l * &r
    };
    RationalEval {
        l: Some(l),
        r,
        g: Some(g),
    }
}

/// Relative closeness of a float against an exact reference.
pub fn close_to_rational(x: f64, reference: &BigRational, rel_tol: f64) -> bool {
    let diff = (rat(x) - reference).abs();
    let scale = reference.abs().max(BigRational::one());
    diff <= rat(rel_tol) * scale
}
