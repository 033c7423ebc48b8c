//! Exact scalar coefficients: Gaussian rationals graded by powers of ħ and m².

use std::fmt;
use std::ops::{Mul, Neg};

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

/// Exact rational number.
pub type Rational = Ratio<i128>;

/// Exact Gaussian rational `re + i·im`.
pub type Number = Complex<Rational>;

pub fn rat(numer: i128, denom: i128) -> Rational {
    Ratio::new(numer, denom)
}

pub fn int(n: i128) -> Number {
    Complex::new(Ratio::from_integer(n), Rational::zero())
}

pub fn imag(n: i128) -> Number {
    Complex::new(Rational::zero(), Ratio::from_integer(n))
}

pub fn number(re: Rational, im: Rational) -> Number {
    Complex::new(re, im)
}

pub fn is_zero(n: &Number) -> bool {
    n.re.is_zero() && n.im.is_zero()
}

/// True when `|n| = 1`.
pub fn is_unit_modulus(n: &Number) -> bool {
    (n.re * n.re + n.im * n.im).is_one()
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Renders a Gaussian rational the way the expression language reads it:
/// `3`, `-1/2`, `2i`, `-i`, `(1+2i)`.
pub fn format_number(n: &Number) -> String {
    match (n.re.is_zero(), n.im.is_zero()) {
        (true, true) => "0".to_string(),
        (false, true) => fmt_rational(&n.re),
        (true, false) => fmt_imag(&n.im),
        (false, false) => {
            let im = if n.im.is_negative() {
                format!("-{}", fmt_imag(&-n.im))
            } else {
                format!("+{}", fmt_imag(&n.im))
            };
            format!("({}{})", fmt_rational(&n.re), im)
        }
    }
}

fn fmt_imag(im: &Rational) -> String {
    if im.is_one() {
        "i".to_string()
    } else if (-*im).is_one() {
        "-i".to_string()
    } else {
        format!("{}i", fmt_rational(im))
    }
}

/// A coefficient `value · ħ^hbar_power · (m²)^mass2_power`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScalarCoeff {
    pub value: Number,
    pub hbar_power: u32,
    pub mass2_power: u32,
}

impl ScalarCoeff {
    pub fn new(value: Number, hbar_power: u32, mass2_power: u32) -> Self {
        Self { value, hbar_power, mass2_power }.normalized()
    }

    pub fn zero() -> Self {
        Self { value: Number::zero(), hbar_power: 0, mass2_power: 0 }
    }

    pub fn one() -> Self {
        Self::number(int(1))
    }

    pub fn number(value: Number) -> Self {
        Self::new(value, 0, 0)
    }

    pub fn hbar() -> Self {
        Self::new(int(1), 1, 0)
    }

    pub fn is_zero(&self) -> bool {
        is_zero(&self.value)
    }

    /// Sum of two coefficients of the same grading; `None` when the gradings differ.
    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        if self.is_zero() {
            return Some(other.clone());
        }
        if other.is_zero() {
            return Some(self.clone());
        }
        (self.hbar_power == other.hbar_power && self.mass2_power == other.mass2_power)
            .then(|| Self::new(self.value + other.value, self.hbar_power, self.mass2_power))
    }

    fn normalized(self) -> Self {
        if is_zero(&self.value) {
            Self::zero()
        } else {
            self
        }
    }
}

impl Mul for &ScalarCoeff {
    type Output = ScalarCoeff;

    fn mul(self, rhs: &ScalarCoeff) -> ScalarCoeff {
        ScalarCoeff::new(
            self.value * rhs.value,
            self.hbar_power + rhs.hbar_power,
            self.mass2_power + rhs.mass2_power,
        )
    }
}

impl Mul for ScalarCoeff {
    type Output = ScalarCoeff;

    fn mul(self, rhs: ScalarCoeff) -> ScalarCoeff {
        &self * &rhs
    }
}

impl Neg for ScalarCoeff {
    type Output = ScalarCoeff;

    fn neg(self) -> ScalarCoeff {
        ScalarCoeff::new(-self.value, self.hbar_power, self.mass2_power)
    }
}

impl fmt::Display for ScalarCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.hbar_power {
            0 => {}
            1 => parts.push("hbar".into()),
            k => parts.push(format!("hbar^{k}")),
        }
        match self.mass2_power {
            0 => {}
            1 => parts.push("m2".into()),
            k => parts.push(format!("m2^{k}")),
        }
        let value = format_number(&self.value);
        if parts.is_empty() {
            return f.write_str(&value);
        }
        let body = parts.join(" * ");
        match value.as_str() {
            "1" => f.write_str(&body),
            "-1" => write!(f, "-{body}"),
            _ => write!(f, "{value} * {body}"),
        }
    }
}

impl Serialize for ScalarCoeff {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
