use super::fm::linear_closure;
use super::Poly;
use crate::syntax::{free_vars, Cmp, Formula, VarId};

/// Topological closure of the truth set of a quantifier-free formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureResult {
    /// Exact closure. Quantifier-free when `quantifier_free` holds, otherwise the
    /// explicit `forall eps > 0 exists y (φ(y) & |x - y|^2 < eps^2)` form.
    pub formula: Formula,
    pub quantifier_free: bool,
    /// Strict atoms relaxed in negation normal form. A superset of the closure,
    /// meant for display only.
    pub display: Formula,
}

pub fn closure(f: &Formula) -> ClosureResult {
    let display = relaxed_closure(f);
    if is_closed(f) {
        return ClosureResult { formula: f.clone(), quantifier_free: true, display };
    }
    if f.atoms().iter().all(|a| a.poly.is_linear()) {
        if let Ok(g) = linear_closure(f) {
            return ClosureResult { display: g.clone(), formula: g, quantifier_free: true };
        }
    }
    ClosureResult { formula: ball_formula(f), quantifier_free: false, display }
}

/// The exact closure formula.
pub fn closure_exact(f: &Formula) -> Formula {
    closure(f).formula
}

/// Negation normal form with only `=`, `<=`, `>=` atoms: the truth set is closed.
fn is_closed(f: &Formula) -> bool {
    f.is_quantifier_free() && f.nnf().atoms().iter().all(|a| matches!(a.cmp, Cmp::Eq | Cmp::Le | Cmp::Ge))
}

/// Replaces `<`, `>` by `<=`, `>=` and `!=` by `true` in negation normal form.
pub fn relaxed_closure(f: &Formula) -> Formula {
    fn go(f: &Formula) -> Formula {
        match f {
            Formula::Atom(a) => match a.cmp {
                Cmp::Lt => Formula::atom(a.poly.clone(), Cmp::Le),
                Cmp::Gt => Formula::atom(a.poly.clone(), Cmp::Ge),
                Cmp::Ne if !a.poly.is_zero() => Formula::tt(),
                _ => f.clone(),
            },
            Formula::And(a, b) => Formula::and(go(a), go(b)),
            Formula::Or(a, b) => Formula::or(go(a), go(b)),
            other => other.clone(),
        }
    }
    let r = go(&f.nnf());
    if r == f.nnf() {
        f.clone()
    } else {
        r
    }
}

struct Fresh {
    eps: VarId,
    pairs: Vec<(VarId, VarId)>,
}

fn fresh_names(f: &Formula) -> Fresh {
    let mut taken = f.all_vars();
    let fv: Vec<VarId> = free_vars(f).into_iter().collect();
    let eps = VarId::fresh("eps", |v| taken.contains(v));
    taken.insert(eps.clone());
    let mut pairs = Vec::new();
    for x in fv {
        let y = VarId::fresh(&format!("{x}_c"), |v| taken.contains(v));
        taken.insert(y.clone());
        pairs.push((x, y));
    }
    Fresh { eps, pairs }
}

fn rename_all(f: &Formula, pairs: &[(VarId, VarId)]) -> Formula {
    let map = pairs.iter().map(|(x, y)| (x.clone(), Poly::var(y))).collect();
    map_atoms(f, &|a| Formula::atom(a.poly.substitute_all(&map), a.cmp))
}

fn map_atoms(f: &Formula, g: &dyn Fn(&crate::syntax::Atom) -> Formula) -> Formula {
    match f {
        Formula::Atom(a) => g(a),
        Formula::Not(h) => Formula::not(map_atoms(h, g)),
        Formula::And(a, b) => Formula::and(map_atoms(a, g), map_atoms(b, g)),
        Formula::Or(a, b) => Formula::or(map_atoms(a, g), map_atoms(b, g)),
        Formula::Imp(a, b) => Formula::imp(map_atoms(a, g), map_atoms(b, g)),
        Formula::Equiv(a, b) => Formula::equiv(map_atoms(a, g), map_atoms(b, g)),
        other => other.clone(),
    }
}

fn wrap(fresh: &Fresh, near: Formula, body: Formula) -> Formula {
    let eps = Poly::var(&fresh.eps);
    let inner = fresh.pairs.iter().rev().fold(Formula::and(body, near), |acc, (_, y)| Formula::exists(y.clone(), acc));
    Formula::forall(fresh.eps.clone(), Formula::imp(Formula::atom(eps, Cmp::Gt), inner))
}

/// `forall eps (eps > 0 -> exists y (φ(y) & Σ (x_i - y_i)^2 < eps^2))`.
fn ball_formula(f: &Formula) -> Formula {
    let fresh = fresh_names(f);
    let dist = fresh.pairs.iter().fold(Poly::zero(), |acc, (x, y)| acc + (Poly::var(x) - Poly::var(y)).pow(2));
    let near = Formula::atom(dist - Poly::var(&fresh.eps).pow(2), Cmp::Lt);
    wrap(&fresh, near, rename_all(f, &fresh.pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_state_formula;

    fn f(s: &str) -> Formula {
        parse_state_formula(s).unwrap()
    }

    #[test]
    fn closure_of_strict_bound() {
        let c = closure(&f("v < 100"));
        assert!(c.quantifier_free);
        assert_eq!(c.formula, f("v <= 100"));
        assert_eq!(c.formula.to_string(), "v <= 100");
    }

    #[test]
    fn closed_formula_is_unchanged() {
        assert_eq!(closure_exact(&f("x <= 0")), f("x <= 0"));
        assert_eq!(closure_exact(&f("!(x > 0) | y = 1")), f("!(x > 0) | y = 1"));
    }

    #[test]
    fn empty_set_stays_empty() {
        let c = closure(&f("x < 1 & x > 1"));
        assert!(c.formula.is_false_literal());
        // the syntactic relaxation would be wrong here
        assert_eq!(relaxed_closure(&f("x < 1 & x > 1")), f("x <= 1 & x >= 1"));
    }

    #[test]
    fn nonlinear_closure_keeps_quantified_form() {
        let c = closure(&f("x^2 + y^2 < 1"));
        assert!(!c.quantifier_free);
        assert!(matches!(c.formula, Formula::Forall(..)));
        assert_eq!(c.display, f("x^2 + y^2 <= 1"));
    }

    #[test]
    fn closure_of_disequality_is_everything() {
        assert!(crate::poly::check_validity(&closure_exact(&f("x != 3"))).is_valid());
        assert!(closure_exact(&f("x != 3 & x = 3")).is_false_literal());
    }
}
