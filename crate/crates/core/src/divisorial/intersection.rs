use num_traits::{One, Signed, Zero};

use super::completion::CompletionElement;
use super::cone::RationalVector;
use crate::error::{Error, Result};
use crate::rational::{qi, Q};

/// A symmetric multilinear form `(ℚ^d)^{n+1} → ℚ`, stored as its full
/// coefficient tensor in row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionMap {
    dim: usize,
    arity: usize,
    table: Vec<Q>,
}

impl IntersectionMap {
    pub fn new(dim: usize, arity: usize, table: Vec<Q>) -> Result<Self> {
        if arity == 0 || dim == 0 {
            return Err(Error::IntersectionAxiom("arity and dimension must be positive".into()));
        }
        let expected = dim.checked_pow(arity as u32).ok_or_else(|| Error::IntersectionAxiom("table too large".into()))?;
        if table.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: table.len() });
        }
        let map = IntersectionMap { dim, arity, table };
        for flat in 0..expected {
            let mut idx = map.unflatten(flat);
            idx.sort_unstable();
            if map.table[flat] != map.table[map.flatten(&idx)] {
                return Err(Error::IntersectionAxiom(format!("not symmetric at index {:?}", map.unflatten(flat))));
            }
        }
        Ok(map)
    }

    pub fn from_fn(dim: usize, arity: usize, f: impl Fn(&[usize]) -> Q) -> Result<Self> {
        let n = dim.pow(arity as u32);
        let probe = IntersectionMap { dim, arity, table: Vec::new() };
        let table = (0..n).map(|flat| f(&probe.unflatten(flat))).collect();
        Self::new(dim, arity, table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.arity];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.dim;
            flat /= self.dim;
        }
        idx
    }

    fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn eval(&self, args: &[&RationalVector]) -> Result<Q> {
        if args.len() != self.arity {
            return Err(Error::DimensionMismatch { expected: self.arity, found: args.len() });
        }
        for a in args {
            a.check_dim(self.dim)?;
        }
        let mut total = Q::zero();
        for (flat, coef) in self.table.iter().enumerate() {
            if coef.is_zero() {
                continue;
            }
            let idx = self.unflatten(flat);
            let mut term = coef.clone();
            for (a, &i) in args.iter().zip(&idx) {
                let c = &a.coords()[i];
                if c.is_zero() {
                    term = Q::zero();
                    break;
                }
                term *= c;
            }
            total += term;
        }
        Ok(total)
    }
}

/// A tuple on which the form takes a negative value.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub args: Vec<RationalVector>,
    pub value: Q,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmpCheck {
    pub element: RationalVector,
    pub witness: Option<RationalVector>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    /// Most negative value on tuples of `N`-generators.
    pub nef: Option<Violation>,
    /// Most negative value on (order generator, `N`-generators…) tuples.
    pub eff: Option<Violation>,
    pub amp: Vec<AmpCheck>,
}

impl AxiomReport {
    pub fn nef_eff_hold(&self) -> bool {
        self.nef.is_none() && self.eff.is_none()
    }

    pub fn amp_holds(&self) -> bool {
        self.amp.iter().all(|a| a.witness.is_some())
    }
}

/// Checks (NEF) and (EFF) on generator tuples and searches the supplied
/// `N`-generators (and their sum) for (AMP) witnesses for each nonzero order
/// generator.
pub fn check_intersection_axioms(
    h: &IntersectionMap,
    generators_n: &[RationalVector],
    generators_order: &[RationalVector],
) -> Result<AxiomReport> {
    let worst = |cur: Option<Violation>, args: Vec<RationalVector>, value: Q| -> Option<Violation> {
        if !value.is_negative() {
            return cur;
        }
        match cur {
            Some(v) if v.value <= value => Some(v),
            _ => Some(Violation { args, value }),
        }
    };

    let mut nef = None;
    for combo in multisets(generators_n.len(), h.arity) {
        let args: Vec<&RationalVector> = combo.iter().map(|&i| &generators_n[i]).collect();
        let value = h.eval(&args)?;
        nef = worst(nef, args.into_iter().cloned().collect(), value);
    }

    let mut eff = None;
    for x in generators_order {
        for combo in multisets(generators_n.len(), h.arity - 1) {
            let mut args: Vec<&RationalVector> = vec![x];
            args.extend(combo.iter().map(|&i| &generators_n[i]));
            let value = h.eval(&args)?;
            eff = worst(eff, args.into_iter().cloned().collect(), value);
        }
    }

    let mut candidates: Vec<RationalVector> = generators_n.to_vec();
    if let Some(first) = generators_n.first() {
        let sum = generators_n.iter().skip(1).fold(first.clone(), |acc, g| &acc + g);
        candidates.push(sum);
    }
    let mut amp = Vec::new();
    for x in generators_order.iter().filter(|x| !x.is_zero()) {
        let mut witness = None;
        for a in &candidates {
            let mut args = vec![x];
            args.extend(std::iter::repeat_n(a, h.arity - 1));
            if h.eval(&args)?.is_positive() {
                witness = Some(a.clone());
                break;
            }
        }
        amp.push(AmpCheck { element: x.clone(), witness });
    }
    Ok(AxiomReport { nef, eff, amp })
}

/// Value of the extended form on completion elements, with the data used
/// to certify the tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedValue {
    /// Exact value of the form at the chosen depth.
    pub value: Q,
    /// Sequence index the arguments were evaluated at.
    pub depth: u64,
    /// Bound on the partial forms near the arguments.
    pub bound: Q,
    /// Closeness in the `b̃`-topology that guarantees the tolerance.
    pub delta: Q,
}

impl ExtendedValue {
    pub fn to_f64(&self) -> f64 {
        crate::rational::to_f64(&self.value)
    }
}

/// Evaluates the continuous extension of `h` to the completion within `eps`.
///
/// `b_tilde` is the admissibility witness: an element of `N` dominating the
/// boundary element of every argument. The partial forms
/// `h(b̃, ·, …, ·)` near the arguments are bounded by
/// `C = max_j h(b̃, x_0 + b̃, …, x_{j−1} + b̃, x_{j+1} + b̃, …)`, where `x_k`
/// is an anchor term after which the `k`-th sequence stays within `b̃`.
/// Sequences then have to be followed until they are `δ`-close with
/// `δ = min(1, ε / ((n+1)·C))`.
pub fn extend_intersection(
    h: &IntersectionMap,
    args: &[CompletionElement],
    b_tilde: &RationalVector,
    eps: &Q,
) -> Result<ExtendedValue> {
    if args.len() != h.arity() {
        return Err(Error::DimensionMismatch { expected: h.arity(), found: args.len() });
    }
    if !eps.is_positive() {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    let space = args[0].space().clone();
    b_tilde.check_dim(space.ambient_dim())?;
    if space.ambient_dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: space.ambient_dim() });
    }
    if !space.in_positive_cone(b_tilde)? {
        return Err(Error::Admissibility("witness is not in N".into()));
    }
    for a in args {
        if **a.space() != *space {
            return Err(Error::MismatchedCompletion("arguments live in different spaces".into()));
        }
        if !space.leq(a.b(), b_tilde)? {
            return Err(Error::Admissibility(format!("b = {} is not <= witness {}", a.b(), b_tilde)));
        }
    }

    let half = Q::one() / qi(2);
    let anchor_depths: Vec<u64> = args.iter().map(|a| a.modulus(&half)).collect();
    let anchors: Vec<RationalVector> = args.iter().zip(&anchor_depths).map(|(a, &n)| a.term(n)).collect();
    for x in &anchors {
        if !space.in_positive_cone(x)? {
            return Err(Error::IntersectionAxiom(format!("argument term {x} is not in N")));
        }
    }

    let shifted: Vec<RationalVector> = anchors.iter().map(|x| x + b_tilde).collect();
    let mut bound = Q::zero();
    for j in 0..args.len() {
        let mut list: Vec<&RationalVector> = vec![b_tilde];
        list.extend(shifted.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v));
        let c = h.eval(&list)?;
        if c.is_negative() {
            return Err(Error::IntersectionAxiom(format!("negative value {c} on N-tuple")));
        }
        bound = bound.max(c);
    }

    let n_plus_one = qi(args.len() as i64);
    let delta = if bound.is_zero() {
        Q::one()
    } else {
        (eps / (n_plus_one * &bound)).min(Q::one())
    };
    let target = &delta / qi(2);
    let depth = args
        .iter()
        .zip(&anchor_depths)
        .map(|(a, &n0)| a.modulus(&target).max(n0))
        .max()
        .unwrap_or(1);
    let terms: Vec<RationalVector> = args.iter().map(|a| a.term(depth)).collect();
    for t in &terms {
        if !space.in_positive_cone(t)? {
            return Err(Error::IntersectionAxiom(format!("argument term {t} is not in N")));
        }
    }
    let refs: Vec<&RationalVector> = terms.iter().collect();
    let value = h.eval(&refs)?;
    Ok(ExtendedValue { value, depth, bound, delta })
}

/// Non-decreasing index tuples of length `k` over `0..n`.
fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisorial::space::DivisorialSpace;
    use crate::rational::qr;
    use std::sync::Arc;

    pub(crate) fn mixed_degree() -> IntersectionMap {
        // h(x, y) = x1·y2 + x2·y1
        IntersectionMap::new(2, 2, vec![qi(0), qi(1), qi(1), qi(0)]).unwrap()
    }

    fn v(c: &[i64]) -> RationalVector {
        RationalVector::from_ints(c)
    }

    #[test]
    fn asymmetric_tables_are_rejected() {
        assert!(IntersectionMap::new(2, 2, vec![qi(0), qi(1), qi(2), qi(0)]).is_err());
    }

    #[test]
    fn mixed_degree_passes() {
        let r = check_intersection_axioms(&mixed_degree(), &[v(&[1, 0]), v(&[0, 1])], &[v(&[1, 0]), v(&[0, 1])]).unwrap();
        assert!(r.nef_eff_hold());
        assert!(r.amp_holds());
    }

    #[test]
    fn bad_generator_is_reported() {
        let gens = [v(&[1, 0]), v(&[0, 1]), v(&[1, -1])];
        let r = check_intersection_axioms(&mixed_degree(), &gens, &[v(&[1, 0]), v(&[0, 1])]).unwrap();
        let viol = r.nef.unwrap();
        assert_eq!(viol.args, vec![v(&[1, -1]), v(&[1, -1])]);
        assert_eq!(viol.value, qi(-2));
    }

    #[test]
    fn zero_map_fails_amp_only() {
        let zero = IntersectionMap::new(1, 1, vec![qi(0)]).unwrap();
        let r = check_intersection_axioms(&zero, &[v(&[1])], &[v(&[1]), v(&[3])]).unwrap();
        assert!(r.nef_eff_hold());
        assert_eq!(r.amp.len(), 2);
        assert!(r.amp.iter().all(|a| a.witness.is_none()));
    }

    #[test]
    fn constant_arguments_give_exact_values() {
        let space = Arc::new(DivisorialSpace::standard(2));
        let b = v(&[1, 1]);
        let x = CompletionElement::constant(space.clone(), b.clone(), v(&[1, 0])).unwrap();
        let y = CompletionElement::constant(space, b.clone(), v(&[0, 1])).unwrap();
        let r = extend_intersection(&mixed_degree(), &[x, y], &b, &qr(1, 10)).unwrap();
        assert_eq!(r.value, qi(1));
    }

    #[test]
    fn missing_witness_is_rejected() {
        let space = Arc::new(DivisorialSpace::standard(2));
        let b = v(&[1, 1]);
        let x = CompletionElement::constant(space.clone(), b.clone(), v(&[1, 0])).unwrap();
        let y = CompletionElement::constant(space, b, v(&[0, 1])).unwrap();
        let r = extend_intersection(&mixed_degree(), &[x, y], &v(&[1, 0]), &qr(1, 10));
        assert!(matches!(r, Err(Error::Admissibility(_))));
    }

    #[test]
    fn linear_functional_on_cauchy_sequence() {
        use num_traits::ToPrimitive;
        let space = Arc::new(DivisorialSpace::standard(2));
        let b = v(&[1, 1]);
        // x_n = (2 + 1/n, 3), h(x) = x1 + 2·x2 → 8
        let x = CompletionElement::new(
            space,
            b.clone(),
            |n| RationalVector::new(vec![qi(2) + qr(1, n as i64), qi(3)]),
            |eps: &Q| eps.recip().ceil().to_integer().to_u64().unwrap(),
        )
        .unwrap();
        let h = IntersectionMap::new(2, 1, vec![qi(1), qi(2)]).unwrap();
        let eps = qr(1, 1000);
        let r = extend_intersection(&h, &[x], &b, &eps).unwrap();
        assert!((r.value - qi(8)).abs() <= eps);
    }
}
