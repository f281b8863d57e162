//! Interval-decorated temporal formulas and their translation to freeze
//! form.
//!
//! Each timed temporal operator carries an interval on the elapsed time
//! between the current position and the witnessing position. The
//! translation freezes the current timestamp into a fresh variable and
//! turns the interval into explicit constraints on it, so a timed formula
//! monitors through the same table algorithm as any other formula. The
//! derived operators are expanded before translation: `F` through `true U`,
//! `G` and `R` through their negation duals.

use super::{Formula, Relation};

/// Closed interval on elapsed time; `upper` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    /// `[0, inf]`, the interval that does not constrain anything.
    pub fn untimed() -> Self {
        Interval { lower: 0.0, upper: f64::INFINITY }
    }

    pub fn is_untimed(&self) -> bool {
        self.lower == 0.0 && self.upper.is_infinite()
    }

    pub fn contains(&self, elapsed: f64) -> bool {
        self.lower <= elapsed && elapsed <= self.upper
    }
}

/// Formula in the interval-decorated grammar: no freeze binders, no
/// explicit constraints; time enters only through operator intervals.
#[derive(Debug, Clone, PartialEq)]
pub enum MtlFormula {
    True,
    Prop(String),
    Not(Box<MtlFormula>),
    And(Box<MtlFormula>, Box<MtlFormula>),
    Or(Box<MtlFormula>, Box<MtlFormula>),
    Implies(Box<MtlFormula>, Box<MtlFormula>),
    Next(Box<MtlFormula>),
    Until(Box<MtlFormula>, Box<MtlFormula>, Interval),
    Release(Box<MtlFormula>, Box<MtlFormula>, Interval),
    Eventually(Box<MtlFormula>, Interval),
    Always(Box<MtlFormula>, Interval),
}

impl MtlFormula {
    pub fn prop(name: &str) -> Self {
        MtlFormula::Prop(name.to_owned())
    }

    pub fn fals() -> Self {
        MtlFormula::not(MtlFormula::True)
    }

    // A constructor like its siblings, not an operator impl.
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: MtlFormula) -> Self {
        MtlFormula::Not(Box::new(f))
    }

    pub fn and(l: MtlFormula, r: MtlFormula) -> Self {
        MtlFormula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: MtlFormula, r: MtlFormula) -> Self {
        MtlFormula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: MtlFormula, r: MtlFormula) -> Self {
        MtlFormula::Implies(Box::new(l), Box::new(r))
    }

    pub fn next(f: MtlFormula) -> Self {
        MtlFormula::Next(Box::new(f))
    }

    pub fn until(l: MtlFormula, r: MtlFormula, interval: Interval) -> Self {
        MtlFormula::Until(Box::new(l), Box::new(r), interval)
    }

    pub fn release(l: MtlFormula, r: MtlFormula, interval: Interval) -> Self {
        MtlFormula::Release(Box::new(l), Box::new(r), interval)
    }

    pub fn eventually(f: MtlFormula, interval: Interval) -> Self {
        MtlFormula::Eventually(Box::new(f), interval)
    }

    pub fn always(f: MtlFormula, interval: Interval) -> Self {
        MtlFormula::Always(Box::new(f), interval)
    }
}

/// Translates to freeze form. Fresh variables are named `x1, x2, ...` in
/// the order the timed operators appear in the output, so the result needs
/// no further renaming; it is closed and every block is self-contained.
pub fn translate_mtl(formula: &MtlFormula) -> Formula {
    let mut counter = 0;
    translate(formula, &mut counter)
}

fn translate(formula: &MtlFormula, counter: &mut u32) -> Formula {
    match formula {
        MtlFormula::True => Formula::True,
        MtlFormula::Prop(name) => Formula::Prop(name.clone()),
        MtlFormula::Not(f) => Formula::not(translate(f, counter)),
        MtlFormula::And(l, r) => Formula::and(translate(l, counter), translate(r, counter)),
        MtlFormula::Or(l, r) => Formula::or(translate(l, counter), translate(r, counter)),
        MtlFormula::Implies(l, r) => Formula::implies(translate(l, counter), translate(r, counter)),
        MtlFormula::Next(f) => Formula::next(translate(f, counter)),
        MtlFormula::Until(l, r, interval) => timed_until(l, r, *interval, counter),
        MtlFormula::Eventually(f, interval) => {
            timed_until(&MtlFormula::True, f, *interval, counter)
        }
        MtlFormula::Always(f, interval) => Formula::not(timed_until(
            &MtlFormula::True,
            &MtlFormula::not((**f).clone()),
            *interval,
            counter,
        )),
        MtlFormula::Release(l, r, interval) => Formula::not(timed_until(
            &MtlFormula::not((**l).clone()),
            &MtlFormula::not((**r).clone()),
            *interval,
            counter,
        )),
    }
}

fn timed_until(
    lhs: &MtlFormula,
    rhs: &MtlFormula,
    interval: Interval,
    counter: &mut u32,
) -> Formula {
    if interval.is_untimed() {
        return Formula::until(translate(lhs, counter), translate(rhs, counter));
    }
    *counter += 1;
    let variable = format!("x{counter}");
    let lower = Formula::constraint(&variable, Relation::Ge, interval.lower);
    let guard = if interval.upper.is_finite() {
        Formula::and(lower, Formula::constraint(&variable, Relation::Le, interval.upper))
    } else {
        lower
    };
    let lhs = translate(lhs, counter);
    let rhs = translate(rhs, counter);
    Formula::freeze(variable, Formula::until(lhs, Formula::and(guard, rhs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{check_encapsulated, parse, parse_mtl, validate_closed};

    fn translated(text: &str) -> Formula {
        translate_mtl(&parse_mtl(text).unwrap())
    }

    #[test]
    fn timed_until_freezes_a_fresh_variable() {
        assert_eq!(
            translated("a U[1,2] b"),
            parse("x1.(a U ((x1 >= 1 /\\ x1 <= 2) /\\ b))").unwrap()
        );
    }

    #[test]
    fn untimed_operators_stay_plain() {
        assert_eq!(translated("a U b"), parse("a U b").unwrap());
        assert_eq!(translated("F a"), parse("true U a").unwrap());
        assert_eq!(translated("G a"), parse("!(true U !a)").unwrap());
        assert_eq!(translated("a R b"), parse("!(!a U !b)").unwrap());
    }

    #[test]
    fn timed_eventually_expands_through_until() {
        assert_eq!(
            translated("F[0,5] a"),
            parse("x1.(true U ((x1 >= 0 /\\ x1 <= 5) /\\ a))").unwrap()
        );
    }

    #[test]
    fn timed_always_expands_through_negation() {
        assert_eq!(
            translated("G[1,2] a"),
            parse("!x1.(true U ((x1 >= 1 /\\ x1 <= 2) /\\ !a))").unwrap()
        );
    }

    #[test]
    fn timed_release_expands_through_negation() {
        assert_eq!(
            translated("a R[0,3] b"),
            parse("!x1.(!a U ((x1 >= 0 /\\ x1 <= 3) /\\ !b))").unwrap()
        );
    }

    #[test]
    fn infinite_upper_bound_drops_its_constraint() {
        assert_eq!(translated("F[2,inf] a"), parse("x1.(true U (x1 >= 2 /\\ a))").unwrap());
    }

    #[test]
    fn nested_timed_operators_get_distinct_variables() {
        assert_eq!(
            translated("(F[0,1] a) U[2,3] b"),
            parse(
                "x1.((x2.(true U ((x2 >= 0 /\\ x2 <= 1) /\\ a))) U ((x1 >= 2 /\\ x1 <= 3) /\\ b))"
            )
            .unwrap()
        );
    }

    #[test]
    fn translation_is_closed_and_self_contained() {
        for text in [
            "a U[1,2] b",
            "G[0,10] (a -> F[0,3] b)",
            "(F[0,1] a) U[2,3] (G[1,4] b)",
            "a R[2,inf] (b U c)",
        ] {
            let f = translated(text);
            validate_closed(&f).unwrap();
            check_encapsulated(&f).unwrap();
        }
    }

    #[test]
    fn untimed_interval_membership() {
        let untimed = Interval::untimed();
        assert!(untimed.is_untimed());
        assert!(untimed.contains(0.0));
        assert!(untimed.contains(1e12));
        let window = Interval { lower: 1.0, upper: 2.0 };
        assert!(!window.is_untimed());
        assert!(window.contains(1.0));
        assert!(window.contains(2.0));
        assert!(!window.contains(0.99));
        assert!(!window.contains(2.01));
    }
}
