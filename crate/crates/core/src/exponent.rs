//! Exponent vectors packed into a single 64-bit word.
//!
//! The word is cut into bit fields. Variable 0 occupies the most significant
//! variable field and the last variable the least significant one. Under the
//! graded order an extra field holding the total degree sits above all the
//! variable fields. With this layout the unsigned comparison of two words is
//! exactly the monomial order, and multiplying monomials is a single integer
//! addition.
//!
//! The all-ones word is never a valid exponent: it is reserved for
//! [`Exponent::END`], the sentinel that closes the last split interval.

use std::fmt;

use crate::error::{Error, Result};

/// Upper bound on the number of variables (at least four bits per field once
/// the degree field is added).
pub const MAX_VARS: usize = 14;
/// Widest supported variable field; components are `u32`.
pub const MAX_VAR_BITS: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum MonomialOrder {
    /// Pure lexicographic, `x_1 > x_2 > ... > x_m`.
    Lex,
    /// Total degree first, ties broken lexicographically.
    #[default]
    Grlex,
}

/// A packed exponent vector.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Exponent(u64);

impl Exponent {
    pub const ZERO: Exponent = Exponent(0);
    /// Greater than every valid exponent of every layout.
    pub const END: Exponent = Exponent(u64::MAX);

    pub const fn from_raw(raw: u64) -> Self {
        Exponent(raw)
    }

    pub const fn raw(self) -> u64 {
        self.0
    }

    /// Field-wise sum without overflow checks. Only valid once the caller has
    /// established that no field can overflow.
    #[inline(always)]
    pub(crate) fn add_unchecked(self, other: Exponent) -> Exponent {
        Exponent(self.0.wrapping_add(other.0))
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Exponent::END {
            f.write_str("Exponent(END)")
        } else {
            write!(f, "Exponent({:#018x})", self.0)
        }
    }
}

/// Bit layout of packed exponents for a fixed number of variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Layout {
    order: MonomialOrder,
    nvars: u8,
    widths: [u8; MAX_VARS],
    shifts: [u8; MAX_VARS],
    degree_width: u8,
    degree_shift: u8,
    /// One bit just above every field that does not end at bit 63; a carry
    /// into any of them means some field overflowed.
    carry_mask: u64,
}

fn bits_for(v: u64) -> u32 {
    (64 - v.leading_zeros()).max(1)
}

fn field_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl Layout {
    /// Builds a layout from explicit field widths. `degree_width` must be zero
    /// for [`MonomialOrder::Lex`] and positive for [`MonomialOrder::Grlex`].
    pub fn new(order: MonomialOrder, var_widths: &[u32], degree_width: u32) -> Result<Layout> {
        let m = var_widths.len();
        if m == 0 || m > MAX_VARS {
            return Err(Error::InvalidLayout(format!(
                "variable count {m} outside 1..={MAX_VARS}"
            )));
        }
        if let Some(w) = var_widths.iter().find(|&&w| w == 0 || w > MAX_VAR_BITS) {
            return Err(Error::InvalidLayout(format!(
                "variable field width {w} outside 1..={MAX_VAR_BITS}"
            )));
        }
        match order {
            MonomialOrder::Lex if degree_width != 0 => {
                return Err(Error::InvalidLayout(
                    "lex layouts carry no degree field".into(),
                ))
            }
            MonomialOrder::Grlex if degree_width == 0 || degree_width > 63 => {
                return Err(Error::InvalidLayout(format!(
                    "degree field width {degree_width} outside 1..=63"
                )))
            }
            _ => {}
        }
        let total: u32 = var_widths.iter().sum::<u32>() + degree_width;
        if total > 64 {
            return Err(Error::InvalidLayout(format!(
                "fields need {total} bits, only 64 available"
            )));
        }

        let mut widths = [0u8; MAX_VARS];
        let mut shifts = [0u8; MAX_VARS];
        let mut carry_mask = 0u64;
        let mut shift = 0u32;
        for i in (0..m).rev() {
            widths[i] = var_widths[i] as u8;
            shifts[i] = shift as u8;
            shift += var_widths[i];
            if shift < 64 {
                carry_mask |= 1 << shift;
            }
        }
        let degree_shift = shift;
        if degree_width > 0 {
            shift += degree_width;
            if shift < 64 {
                carry_mask |= 1 << shift;
            }
        }
        Ok(Layout {
            order,
            nvars: m as u8,
            widths,
            shifts,
            degree_width: degree_width as u8,
            degree_shift: degree_shift as u8,
            carry_mask,
        })
    }

    /// Splits the 64 bits evenly between the fields; spare bits go to the
    /// degree field (graded) or to the first variable (lex).
    pub fn even(order: MonomialOrder, nvars: usize) -> Result<Layout> {
        if nvars == 0 || nvars > MAX_VARS {
            return Err(Error::InvalidLayout(format!(
                "variable count {nvars} outside 1..={MAX_VARS}"
            )));
        }
        let m = nvars as u32;
        match order {
            MonomialOrder::Grlex => {
                let w = (64 / (m + 1)).min(MAX_VAR_BITS);
                let dw = (64 - m * w).min(63);
                Layout::new(order, &vec![w; nvars], dw)
            }
            MonomialOrder::Lex => {
                let w = (64 / m).min(MAX_VAR_BITS);
                let mut widths = vec![w; nvars];
                widths[0] = (64 - (m - 1) * w).min(MAX_VAR_BITS);
                Layout::new(order, &widths, 0)
            }
        }
    }

    /// Narrowest layout able to hold every exponent whose components are
    /// bounded by `per_var` and whose total degree is bounded by
    /// `total_degree`.
    pub fn for_degree_bounds(
        order: MonomialOrder,
        per_var: &[u64],
        total_degree: u64,
    ) -> Result<Layout> {
        let widths: Vec<u32> = per_var.iter().map(|&d| bits_for(d)).collect();
        if let Some(pos) = widths.iter().position(|&w| w > MAX_VAR_BITS) {
            return Err(Error::ExponentOverflow {
                field: format!("variable {pos}"),
                limit: u32::MAX as u64,
            });
        }
        let dw = match order {
            MonomialOrder::Lex => 0,
            MonomialOrder::Grlex => bits_for(total_degree),
        };
        let layout = Layout::new(order, &widths, dw)?;
        let saturated = per_var
            .iter()
            .enumerate()
            .all(|(i, &d)| d == layout.max_component(i) as u64)
            && (order == MonomialOrder::Lex || layout.max_degree() == Some(total_degree));
        if saturated && layout.used_bits() == 64 {
            return Err(Error::InvalidLayout(
                "degree bounds saturate all 64 bits; the all-ones word is reserved".into(),
            ));
        }
        Ok(layout)
    }

    pub fn for_max_degrees(order: MonomialOrder, per_var: &[u32]) -> Result<Layout> {
        let bounds: Vec<u64> = per_var.iter().map(|&d| d as u64).collect();
        let total = bounds.iter().sum();
        Layout::for_degree_bounds(order, &bounds, total)
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    pub fn var_width(&self, i: usize) -> u32 {
        self.widths[i] as u32
    }

    pub fn degree_width(&self) -> u32 {
        self.degree_width as u32
    }

    pub fn used_bits(&self) -> u32 {
        self.widths[..self.nvars()]
            .iter()
            .map(|&w| w as u32)
            .sum::<u32>()
            + self.degree_width as u32
    }

    pub fn max_component(&self, i: usize) -> u32 {
        field_mask(self.widths[i] as u32) as u32
    }

    /// Largest total degree the degree field can hold (graded layouts only).
    pub fn max_degree(&self) -> Option<u64> {
        (self.degree_width > 0).then(|| field_mask(self.degree_width as u32))
    }

    pub fn pack(&self, v: &[u32]) -> Result<Exponent> {
        if v.len() != self.nvars() {
            return Err(Error::Arity {
                expected: self.nvars(),
                got: v.len(),
            });
        }
        let mut word = 0u64;
        let mut degree = 0u64;
        for (i, &e) in v.iter().enumerate() {
            if e > self.max_component(i) {
                return Err(Error::ExponentOverflow {
                    field: format!("variable {i}"),
                    limit: self.max_component(i) as u64,
                });
            }
            word |= (e as u64) << self.shifts[i];
            degree += e as u64;
        }
        if let Some(max) = self.max_degree() {
            if degree > max {
                return Err(Error::ExponentOverflow {
                    field: "total degree".into(),
                    limit: max,
                });
            }
            word |= degree << self.degree_shift;
        }
        if word == u64::MAX {
            return Err(Error::ExponentOverflow {
                field: "packed word (all-ones is reserved)".into(),
                limit: u64::MAX - 1,
            });
        }
        Ok(Exponent(word))
    }

    pub fn component(&self, e: Exponent, i: usize) -> u32 {
        ((e.0 >> self.shifts[i]) & field_mask(self.widths[i] as u32)) as u32
    }

    pub fn unpack(&self, e: Exponent) -> Vec<u32> {
        (0..self.nvars()).map(|i| self.component(e, i)).collect()
    }

    pub fn degree(&self, e: Exponent) -> u64 {
        match self.max_degree() {
            Some(mask) => (e.0 >> self.degree_shift) & mask,
            None => (0..self.nvars()).map(|i| self.component(e, i) as u64).sum(),
        }
    }

    /// Exponent of the product of two monomials, i.e. the component-wise sum.
    /// One wrapping addition followed by a carry test on every field boundary.
    #[inline]
    pub fn add(&self, a: Exponent, b: Exponent) -> Result<Exponent> {
        let (sum, top) = a.0.overflowing_add(b.0);
        let carries = (a.0 ^ b.0 ^ sum) & self.carry_mask;
        if top || carries != 0 || sum == u64::MAX {
            return Err(self.sum_overflow(a, b));
        }
        Ok(Exponent(sum))
    }

    fn sum_overflow(&self, a: Exponent, b: Exponent) -> Error {
        for i in 0..self.nvars() {
            let s = self.component(a, i) as u64 + self.component(b, i) as u64;
            if s > self.max_component(i) as u64 {
                return Error::ExponentOverflow {
                    field: format!("variable {i}"),
                    limit: self.max_component(i) as u64,
                };
            }
        }
        if let Some(max) = self.max_degree() {
            if self.degree(a) + self.degree(b) > max {
                return Error::ExponentOverflow {
                    field: "total degree".into(),
                    limit: max,
                };
            }
        }
        Error::ExponentOverflow {
            field: "packed word (all-ones is reserved)".into(),
            limit: u64::MAX - 1,
        }
    }

    /// Checks that every sum of an exponent bounded by `(a_max, a_deg)` and
    /// one bounded by `(b_max, b_deg)` packs without overflow. Once this
    /// passes, [`Exponent::add_unchecked`] is exact for those operands.
    pub fn check_sum_bounds(
        &self,
        a_max: &[u32],
        a_deg: u64,
        b_max: &[u32],
        b_deg: u64,
    ) -> Result<()> {
        let mut saturated = true;
        for i in 0..self.nvars() {
            let s = a_max[i] as u64 + b_max[i] as u64;
            let cap = self.max_component(i) as u64;
            if s > cap {
                return Err(Error::ExponentOverflow {
                    field: format!("variable {i}"),
                    limit: cap,
                });
            }
            saturated &= s == cap;
        }
        if let Some(max) = self.max_degree() {
            if a_deg + b_deg > max {
                return Err(Error::ExponentOverflow {
                    field: "total degree".into(),
                    limit: max,
                });
            }
            saturated &= a_deg + b_deg == max;
        }
        if saturated && self.used_bits() == 64 {
            return Err(Error::ExponentOverflow {
                field: "packed word (all-ones is reserved)".into(),
                limit: u64::MAX - 1,
            });
        }
        Ok(())
    }
}
