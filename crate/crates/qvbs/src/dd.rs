//! Double-double arithmetic: a value is an unevaluated sum hi + lo of two
//! doubles with |lo| at most half an ulp of hi, giving about 32 significant
//! digits. The spectral verifier uses it to evaluate closed-form
//! eigen-identities beyond the f64 representation floor of the inputs, which
//! for strongly graded blocks (S = 4 at the edges of the q range) sits around
//! 1e-8 relative. Crate-internal.

#[derive(Debug, Clone, Copy)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Requires |a| >= |b| or a == 0.
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = libm::fma(a, b, -p);
    (p, err)
}

impl Dd {
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn zero() -> Dd {
        Dd::from(0.0)
    }

    pub fn one() -> Dd {
        Dd::from(1.0)
    }

    pub fn to_f64(self) -> f64 {
        self.hi
    }

    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r1 = self.sub(o.mul(Dd::from(q1)));
        let q2 = r1.hi / o.hi;
        let r2 = r1.sub(o.mul(Dd::from(q2)));
        let q3 = r2.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from(q3))
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::zero();
        }
        debug_assert!(self.hi > 0.0, "dd sqrt of negative value");
        // One Newton step on the f64 seed recovers full double-double accuracy.
        let y = libm::sqrt(self.hi);
        let yd = Dd::from(y);
        let diff = self.sub(yd.mul(yd));
        yd.add(diff.div(Dd::from(2.0 * y)))
    }

    pub fn powi(self, n: i64) -> Dd {
        if n < 0 {
            return Dd::one().div(self.powi(-n));
        }
        let mut n = n as u64;
        let mut result = Dd::one();
        let mut base = self;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(base);
            }
        }
        result
    }
}
