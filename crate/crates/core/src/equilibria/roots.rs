//! Scalar root finding: bracketing bisection, golden-section maximization and
//! real-root isolation of polynomials by Sturm sequences.

/// Bisection on a sign change of `f` over `[a, b]`, run to the last
/// representable midpoint.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    if f(b) == 0.0 {
        return b;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Maximizer of a unimodal `f` on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        c
    } else {
        d
    }
}

/// Coefficients lowest degree first.
#[derive(Debug, Clone, PartialEq)]
struct Poly(Vec<f64>);

impl Poly {
    fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect())
    }

    fn scale(&self) -> f64 {
        self.0.iter().fold(0.0, |m: f64, c| m.max(c.abs()))
    }

    /// Drops leading coefficients below `eps` and normalizes to unit max norm.
    fn trimmed(mut self, eps: f64) -> Poly {
        while self.0.last().is_some_and(|c| c.abs() <= eps) {
            self.0.pop();
        }
        let s = self.scale();
        if s > 0.0 {
            self.0.iter_mut().for_each(|c| *c /= s);
        }
        self
    }

    fn rem(&self, d: &Poly) -> Poly {
        let mut r = self.0.clone();
        let lead = *d.0.last().expect("nonzero divisor");
        while r.len() >= d.0.len() {
            let q = r.last().copied().unwrap_or(0.0) / lead;
            let shift = r.len() - d.0.len();
            for (i, c) in d.0.iter().enumerate() {
                r[shift + i] -= q * c;
            }
            r.pop();
        }
        Poly(r)
    }
}

struct Sturm {
    chain: Vec<Poly>,
}

impl Sturm {
    fn new(p: Poly) -> Sturm {
        let mut chain = vec![p.clone().trimmed(0.0)];
        let d = p.derivative().trimmed(0.0);
        if d.0.is_empty() {
            return Sturm { chain };
        }
        chain.push(d);
        loop {
            let n = chain.len();
            if chain[n - 1].degree() == 0 {
                break;
            }
            let mut r = chain[n - 2].rem(&chain[n - 1]);
            r.0.iter_mut().for_each(|c| *c = -*c);
            // remainders of a normalized chain below this are rounding noise
            let r = r.trimmed(1e-11);
            if r.0.is_empty() {
                break;
            }
            chain.push(r);
        }
        Sturm { chain }
    }

    fn variations(&self, x: f64) -> usize {
        let mut count = 0;
        let mut last = 0.0;
        for p in &self.chain {
            let v = p.eval(x);
            if v != 0.0 {
                if last != 0.0 && (v < 0.0) != (last < 0.0) {
                    count += 1;
                }
                last = v;
            }
        }
        count
    }

    /// Distinct roots in `(a, b]`.
    fn count(&self, a: f64, b: f64) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// Real roots of the polynomial with coefficients `coeffs`, highest degree
/// first, in increasing order. Multiple roots are reported once.
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let mut low_first: Vec<f64> = coeffs.iter().rev().copied().collect();
    while low_first.last().is_some_and(|c| *c == 0.0) {
        low_first.pop();
    }
    if low_first.len() < 2 {
        return Vec::new();
    }
    let lead = *low_first.last().unwrap();
    // Cauchy bound on the modulus of every root
    let bound = 1.0
        + low_first[..low_first.len() - 1]
            .iter()
            .fold(0.0, |m: f64, c| m.max((c / lead).abs()));
    let poly = Poly(low_first);
    let sturm = Sturm::new(poly.clone());
    let mut roots = Vec::new();
    isolate(&sturm, &poly, -bound, bound, 0, &mut roots);
    roots
}

fn isolate(sturm: &Sturm, p: &Poly, a: f64, b: f64, depth: usize, roots: &mut Vec<f64>) {
    match sturm.count(a, b) {
        0 => {}
        1 => roots.push(refine(sturm, p, a, b)),
        _ if depth > 80 => roots.push(0.5 * (a + b)),
        _ => {
            // off-center split so symmetric brackets do not land on simple roots like −1
            let m = a + 0.4985 * (b - a);
            isolate(sturm, p, a, m, depth + 1, roots);
            isolate(sturm, p, m, b, depth + 1, roots);
        }
    }
}

fn refine(sturm: &Sturm, p: &Poly, mut a: f64, mut b: f64) -> f64 {
    let (pa, pb) = (p.eval(a), p.eval(b));
    if pb == 0.0 {
        return b;
    }
    if (pa < 0.0) != (pb < 0.0) {
        return bisect(|x| p.eval(x), a, b);
    }
    // even multiplicity: follow the Sturm count instead of the sign
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if sturm.count(a, m) == 1 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        let r = bisect(|x| 2.0 - x * x, 0.0, 2.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let x = golden_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
    }

    #[test]
    fn quartic_with_known_roots() {
        // (x + 1)(x − 2)(x − 3)(x + 0.5)
        let roots = real_roots(&[1.0, -3.5, -1.0, 6.5, 3.0]);
        let expected = [-1.0, -0.5, 2.0, 3.0];
        assert_eq!(roots.len(), 4);
        for (r, e) in roots.iter().zip(expected) {
            assert!((r - e).abs() < 1e-12, "{roots:?}");
        }
    }

    #[test]
    fn complex_pairs_are_skipped() {
        // (x² + 1)(x − 4)
        let roots = real_roots(&[1.0, -4.0, 1.0, -4.0]);
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 4.0).abs() < 1e-12);
        assert!(real_roots(&[1.0, 0.0, 1.0]).is_empty());
        assert!(real_roots(&[0.0, 0.0, 3.0]).is_empty());
    }

    #[test]
    fn double_root_reported_once() {
        // (x − 1)²(x + 2)
        let roots = real_roots(&[1.0, 0.0, -3.0, 2.0]);
        assert_eq!(roots.len(), 2);
        assert!((roots[0] + 2.0).abs() < 1e-10);
        assert!((roots[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn widely_spread_roots() {
        // (x − 1e-3)(x − 1e3)(x + 7)
        let (a, b, c) = (1e-3, 1e3, -7.0);
        let coeffs = [1.0, -(a + b + c), a * b + a * c + b * c, -a * b * c];
        let roots = real_roots(&coeffs);
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([c, a, b]) {
            assert!((r - e).abs() <= 1e-10 * e.abs().max(1.0), "{roots:?}");
        }
    }
}
