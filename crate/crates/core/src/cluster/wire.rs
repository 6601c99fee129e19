//! Frame encoding for the cluster protocol.
//!
//! Every frame starts with a one-byte tag. Integers are little-endian `u64`,
//! strings and variable-length blocks carry a `u64` length prefix, and
//! coefficients use the ring's own wire encoding.
//!
//! ```text
//! BCAST_OPERANDS  tag coeff_tag space A B n_bounds bound*
//!   space         order nvars width* degree_width (len name)*
//!   poly          n exp* coeff*
//! OPCOUNTS        tag first_k n count*
//! RANGE           tag l1 l2
//! RESULT          tag n exp* coeff*
//! ```

use std::sync::Arc;

use crate::coeff::Coeff;
use crate::exponent::{Exponent, Layout, MonomialOrder};
use crate::poly::{PolySpace, Polynomial, VarTable};

pub const BCAST_OPERANDS: u8 = 1;
pub const OPCOUNTS: u8 = 2;
pub const RANGE: u8 = 3;
pub const RESULT: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireError(pub String);

type WireResult<T> = std::result::Result<T, WireError>;

fn bad<T>(msg: impl Into<String>) -> WireResult<T> {
    Err(WireError(msg.into()))
}

pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new(tag: u8) -> Writer {
        Writer { buf: vec![tag] }
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn u64s<I>(&mut self, vs: I) -> &mut Self
    where
        I: IntoIterator<Item = u64>,
        I::IntoIter: ExactSizeIterator,
    {
        let vs = vs.into_iter();
        self.u64(vs.len() as u64);
        for v in vs {
            self.u64(v);
        }
        self
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.u64(s.len() as u64);
        self.buf.extend_from_slice(s.as_bytes());
        self
    }

    pub fn space(&mut self, space: &PolySpace) -> &mut Self {
        let layout = space.layout();
        self.u8(match layout.order() {
            MonomialOrder::Lex => 0,
            MonomialOrder::Grlex => 1,
        });
        self.u8(layout.nvars() as u8);
        for i in 0..layout.nvars() {
            self.u8(layout.var_width(i) as u8);
        }
        self.u8(layout.degree_width() as u8);
        for name in space.vars().names() {
            self.str(name);
        }
        self
    }

    pub fn terms<'c, C: Coeff>(
        &mut self,
        exps: &[Exponent],
        coeffs: impl IntoIterator<Item = &'c C>,
    ) -> &mut Self {
        self.u64(exps.len() as u64);
        for e in exps {
            self.u64(e.raw());
        }
        for c in coeffs {
            c.write_wire(&mut self.buf);
        }
        self
    }

    pub fn poly<C: Coeff>(&mut self, p: &Polynomial<C>) -> &mut Self {
        self.terms(p.exponents(), p.coeffs())
    }

    pub fn finish(&mut self) -> Vec<u8> {
        std::mem::take(&mut self.buf)
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    /// Starts reading a frame, checking its tag.
    pub fn open(buf: &'a [u8], tag: u8) -> WireResult<Reader<'a>> {
        match buf.first() {
            Some(&t) if t == tag => Ok(Reader { buf, pos: 1 }),
            Some(&t) => bad(format!("expected frame tag {tag}, got {t}")),
            None => bad("empty frame"),
        }
    }

    fn take(&mut self, n: usize) -> WireResult<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return bad(format!("frame truncated at byte {}", self.pos));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> WireResult<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u64(&mut self) -> WireResult<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A length that must be backed by at least `min_item` bytes per item.
    fn len(&mut self, min_item: usize) -> WireResult<usize> {
        let n = self.u64()?;
        let left = (self.buf.len() - self.pos) as u64;
        if n.saturating_mul(min_item as u64) > left {
            return bad(format!("length {n} exceeds frame"));
        }
        Ok(n as usize)
    }

    pub fn str(&mut self) -> WireResult<&'a str> {
        let n = self.len(1)?;
        std::str::from_utf8(self.take(n)?).or_else(|_| bad("variable name is not UTF-8"))
    }

    pub fn space(&mut self) -> WireResult<Arc<PolySpace>> {
        let order = match self.u8()? {
            0 => MonomialOrder::Lex,
            1 => MonomialOrder::Grlex,
            o => return bad(format!("unknown monomial order {o}")),
        };
        let nvars = self.u8()? as usize;
        let widths = (0..nvars)
            .map(|_| self.u8().map(u32::from))
            .collect::<WireResult<Vec<u32>>>()?;
        let degree_width = self.u8()? as u32;
        let layout = Layout::new(order, &widths, degree_width).or_else(|e| bad(e.to_string()))?;
        let names = (0..nvars)
            .map(|_| self.str())
            .collect::<WireResult<Vec<&str>>>()?;
        let vars = VarTable::new(names).or_else(|e| bad(e.to_string()))?;
        PolySpace::new(vars, layout).or_else(|e| bad(e.to_string()))
    }

    pub fn u64s(&mut self) -> WireResult<Vec<u64>> {
        let n = self.len(8)?;
        (0..n).map(|_| self.u64()).collect()
    }

    /// A canonical term list: strictly ascending exponents, no zero
    /// coefficients.
    pub fn terms<C: Coeff>(&mut self) -> WireResult<(Vec<Exponent>, Vec<C>)> {
        let n = self.len(8)?;
        let exps: Vec<Exponent> = (0..n)
            .map(|_| self.u64().map(Exponent::from_raw))
            .collect::<WireResult<_>>()?;
        if exps.windows(2).any(|w| w[0] >= w[1]) || exps.last() == Some(&Exponent::END) {
            return bad("term exponents not strictly ascending");
        }
        let mut coeffs = Vec::with_capacity(n);
        for _ in 0..n {
            let Some((c, used)) = C::read_wire(&self.buf[self.pos..]) else {
                return bad(format!("bad {} coefficient at byte {}", C::NAME, self.pos));
            };
            if c.is_zero() {
                return bad("zero coefficient in term list");
            }
            self.pos += used;
            coeffs.push(c);
        }
        Ok((exps, coeffs))
    }

    pub fn poly<C: Coeff>(&mut self, space: &Arc<PolySpace>) -> WireResult<Polynomial<C>> {
        let (exps, coeffs) = self.terms()?;
        Ok(Polynomial::from_canonical_parts(
            space.clone(),
            exps,
            coeffs,
        ))
    }

    pub fn finish(self) -> WireResult<()> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            bad(format!("{} trailing bytes", self.buf.len() - self.pos))
        }
    }
}
