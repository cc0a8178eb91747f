//! Finite-difference stencils on uniform 1-D node lines.
//!
//! Weights are solved exactly in rational arithmetic on unit offsets, so a
//! stencil is an integer vector over one denominator. Application uses a
//! compensated (fma) dot product in unit space and scales by 1/(den·hᵐ)
//! once at the end; derivatives of low-degree polynomials are then exact
//! to the last bit instead of carrying an eps·Σ|c|/hᵐ noise floor.
//!
//! Interior nodes use a centered 7-point window (order ≥ 4 for derivative
//! orders up to 3); the three nodes nearest a boundary use an 8-point
//! one-sided window (order ≥ 5) when the line allows it.

/// One node's stencil: integer numerators over window nodes starting at
/// `start`, with the final scale 1/(den·hᵐ) folded into `scale`.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub start: usize,
    pub nums: Vec<f64>,
    pub scale: f64,
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Rat {
    n: i128,
    d: i128,
}

impl Rat {
    fn new(n: i128, d: i128) -> Rat {
        debug_assert!(d != 0);
        let s = if d < 0 { -1 } else { 1 };
        let g = gcd(n, d).max(1);
        Rat {
            n: s * n / g,
            d: s * d / g,
        }
    }
    fn int(n: i128) -> Rat {
        Rat { n, d: 1 }
    }
    fn sub(self, o: Rat) -> Rat {
        Rat::new(self.n * o.d - o.n * self.d, self.d * o.d)
    }
    fn mul(self, o: Rat) -> Rat {
        Rat::new(self.n * o.n, self.d * o.d)
    }
    fn div(self, o: Rat) -> Rat {
        Rat::new(self.n * o.d, self.d * o.n)
    }
    fn is_zero(self) -> bool {
        self.n == 0
    }
}

/// Exact weights for the m-th derivative at unit offset `z` from unit
/// offsets `d`: solve the moment system Σ c_k d_kᵖ = p!/(p-m)! z^{p-m}.
fn exact_weights(z: i64, offsets: &[i64], m: usize) -> (Vec<i128>, i128) {
    let w = offsets.len();
    // Row p: moments of (x - z)^p; rhs = m! at p = m, else 0.
    let mut a = vec![vec![Rat::int(0); w + 1]; w];
    for (p, row) in a.iter_mut().enumerate() {
        for (k, &dk) in offsets.iter().enumerate() {
            let base = (dk - z) as i128;
            row[k] = Rat::int(base.pow(p as u32));
        }
        row[w] = if p == m {
            Rat::int((1..=m as i128).product())
        } else {
            Rat::int(0)
        };
    }
    // Exact Gaussian elimination.
    for col in 0..w {
        let piv = (col..w).find(|&r| !a[r][col].is_zero()).expect("singular");
        a.swap(col, piv);
        let p = a[col][col];
        for r in 0..w {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].div(p);
                for c in col..=w {
                    let t = a[col][c].mul(f);
                    a[r][c] = a[r][c].sub(t);
                }
            }
        }
    }
    let sols: Vec<Rat> = (0..w).map(|k| a[k][w].div(a[k][k])).collect();
    let mut den: i128 = 1;
    for s in &sols {
        den = den / gcd(den, s.d) * s.d;
    }
    let nums: Vec<i128> = sols.iter().map(|s| s.n * (den / s.d)).collect();
    (nums, den)
}

/// Stencil for the m-th derivative at node `i` of a line with `n` nodes
/// and spacing `h`.
pub fn line_stencil(n: usize, h: f64, i: usize, m: usize) -> Stencil {
    debug_assert!(n >= 7 && (1..=3).contains(&m));
    let (start, w) = if i >= 3 && i + 3 < n {
        (i - 3, 7)
    } else {
        let w = 8.min(n);
        (if i < 3 { 0 } else { n - w }, w)
    };
    let offsets: Vec<i64> = (0..w as i64).collect();
    let (nums, den) = exact_weights((i - start) as i64, &offsets, m);
    Stencil {
        start,
        nums: nums.iter().map(|&v| v as f64).collect(),
        scale: 1.0 / (den as f64 * h.powi(m as i32)),
    }
}

/// All stencils for one line, indexed by node.
pub fn line_stencils(n: usize, h: f64, m: usize) -> Vec<Stencil> {
    (0..n).map(|i| line_stencil(n, h, i, m)).collect()
}

/// Quintic-interpolation weights for the midpoint of segment [i, i+1] on
/// an n-node line: `(start, w)` over six nodes start..start+6, clamped at
/// the boundary. Exact on degree-5 polynomials.
pub fn segment_midpoint_weights(n: usize, i: usize) -> (usize, [f64; 6]) {
    debug_assert!(n >= 6 && i + 1 < n);
    let start = (i as isize - 2).clamp(0, n as isize - 6) as usize;
    let z = (i - start) as f64 + 0.5;
    let mut w = [1.0; 6];
    for k in 0..6 {
        for m in 0..6 {
            if m != k {
                w[k] *= (z - m as f64) / (k as f64 - m as f64);
            }
        }
    }
    (start, w)
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bp = s - a;
    let ap = s - bp;
    (s, (a - ap) + (b - bp))
}

/// Compensated dot product of stencil numerators with values fetched
/// through `get`; exact up to one final rounding.
#[inline]
pub fn stencil_dot(st: &Stencil, get: impl Fn(usize) -> f64) -> f64 {
    let mut s = 0.0;
    let mut comp = 0.0;
    for (k, &c) in st.nums.iter().enumerate() {
        let y = get(st.start + k);
        let p = c * y;
        let e = c.mul_add(y, -p);
        let (t, sig) = two_sum(s, p);
        s = t;
        comp += sig + e;
    }
    (s + comp) * st.scale
}
