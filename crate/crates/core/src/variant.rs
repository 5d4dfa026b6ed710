//! The six-exponent variant family and its canonical indexing.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of variants in the family: 3^6.
pub const VARIANT_COUNT: u16 = 729;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VariantError {
    #[error("exponent {name} must be -1, 0, or 1, got {value}")]
    BadExponent { name: &'static str, value: i8 },
    #[error("variant index {0} out of range 1..={VARIANT_COUNT}")]
    IndexOutOfRange(u32),
}

/// One member of the exponent family.
///
/// Indexing maps each exponent value `v` to the base-3 digit `v + 1` and reads
/// `(alpha, beta, gamma, delta, epsilon, theta)` as a base-3 number with
/// `alpha` most significant; the variant index is that number plus one. The
/// all-ones variant is therefore index 729 and `(-1,-1,-1,-1,-1,-1)` is
/// index 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariantSpec {
    alpha: i8,
    beta: i8,
    gamma: i8,
    delta: i8,
    epsilon: i8,
    theta: i8,
}

impl VariantSpec {
    pub fn new(
        alpha: i8,
        beta: i8,
        gamma: i8,
        delta: i8,
        epsilon: i8,
        theta: i8,
    ) -> Result<Self, VariantError> {
        let named = [
            ("alpha", alpha),
            ("beta", beta),
            ("gamma", gamma),
            ("delta", delta),
            ("epsilon", epsilon),
            ("theta", theta),
        ];
        for (name, value) in named {
            if !(-1..=1).contains(&value) {
                return Err(VariantError::BadExponent { name, value });
            }
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
            theta,
        })
    }

    /// The classic all-ones complexity index.
    pub fn classic() -> Self {
        Self::new(1, 1, 1, 1, 1, 1).unwrap()
    }

    /// The fitness rule: sum over products, inverse of reciprocals over
    /// countries.
    pub fn fitness() -> Self {
        Self::new(1, -1, 1, -1, 0, 0).unwrap()
    }

    pub fn alpha(&self) -> i8 {
        self.alpha
    }
    pub fn beta(&self) -> i8 {
        self.beta
    }
    pub fn gamma(&self) -> i8 {
        self.gamma
    }
    pub fn delta(&self) -> i8 {
        self.delta
    }
    pub fn epsilon(&self) -> i8 {
        self.epsilon
    }
    pub fn theta(&self) -> i8 {
        self.theta
    }

    /// Exponents in `(alpha, beta, gamma, delta, epsilon, theta)` order.
    pub fn exponents(&self) -> [i8; 6] {
        [
            self.alpha,
            self.beta,
            self.gamma,
            self.delta,
            self.epsilon,
            self.theta,
        ]
    }

    /// Canonical index in 1..=729.
    pub fn index(&self) -> u16 {
        let mut value: u16 = 0;
        for digit in self.exponents() {
            value = value * 3 + (digit + 1) as u16;
        }
        value + 1
    }

    /// Inverse of [`VariantSpec::index`].
    pub fn from_index(index: u16) -> Result<Self, VariantError> {
        if !(1..=VARIANT_COUNT).contains(&index) {
            return Err(VariantError::IndexOutOfRange(index as u32));
        }
        let mut value = index - 1;
        let mut digits = [0i8; 6];
        for slot in digits.iter_mut().rev() {
            *slot = (value % 3) as i8 - 1;
            value /= 3;
        }
        let [alpha, beta, gamma, delta, epsilon, theta] = digits;
        Self::new(alpha, beta, gamma, delta, epsilon, theta)
    }

    /// All 729 variants in index order.
    pub fn all() -> impl Iterator<Item = VariantSpec> {
        (1..=VARIANT_COUNT).map(|i| Self::from_index(i).expect("index in range"))
    }
}

impl fmt::Display for VariantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, g, d, e, t] = self.exponents();
        write!(f, "({a},{b},{g},{d},{e},{t})")
    }
}
