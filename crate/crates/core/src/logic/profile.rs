use super::ast::{Atom, Formula};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Exists,
    Forall,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantifierProfile {
    pub universal_count: usize,
    pub existential_count: usize,
    /// Block pattern of the prenex form, e.g. "∃∀∃".
    pub alternation_pattern: String,
}

type Blocks = Vec<(Kind, usize)>;

fn push(blocks: &mut Blocks, kind: Kind, n: usize) {
    if n == 0 {
        return;
    }
    match blocks.last_mut() {
        Some((k, c)) if *k == kind => *c += n,
        _ => blocks.push((kind, n)),
    }
}

/// Interleaves two prefixes, merging equal heads and otherwise
/// pulling the existential block out first.
fn merge(a: Blocks, b: Blocks) -> Blocks {
    let mut out = Blocks::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&(ka, na)), Some(&(kb, nb))) if ka == kb => {
                push(&mut out, ka, na + nb);
                i += 1;
                j += 1;
            }
            (Some(&(ka, na)), Some(&(kb, nb))) => {
                let extend_a = out.last().map(|l| l.0) == Some(ka);
                let extend_b = out.last().map(|l| l.0) == Some(kb);
                if extend_a || (!extend_b && ka == Kind::Exists) {
                    push(&mut out, ka, na);
                    i += 1;
                } else {
                    push(&mut out, kb, nb);
                    j += 1;
                }
            }
            (Some(&(k, n)), None) => {
                push(&mut out, k, n);
                i += 1;
            }
            (None, Some(&(k, n))) => {
                push(&mut out, k, n);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

fn blocks(f: &Formula, positive: bool) -> Blocks {
    match f {
        Formula::Atom(Atom::Pred(..)) | Formula::Atom(_) => vec![],
        Formula::Not(g) => blocks(g, !positive),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().map(|g| blocks(g, positive)).fold(vec![], merge),
        Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
            let is_exists = matches!(f, Formula::Exists(..)) == positive;
            let kind = if is_exists { Kind::Exists } else { Kind::Forall };
            let mut out = vec![];
            push(&mut out, kind, vs.len());
            for (k, n) in blocks(g, positive) {
                push(&mut out, k, n);
            }
            out
        }
    }
}

/// Counts quantified variables in the prenex form obtained by pulling
/// quantifiers out with polarity, merging sibling prefixes block by block.
pub fn profile(f: &Formula) -> QuantifierProfile {
    let bs = blocks(f, true);
    let count = |k: Kind| bs.iter().filter(|b| b.0 == k).map(|b| b.1).sum();
    QuantifierProfile {
        universal_count: count(Kind::Forall),
        existential_count: count(Kind::Exists),
        alternation_pattern: bs
            .iter()
            .map(|b| if b.0 == Kind::Exists { '∃' } else { '∀' })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse, Sort};

    fn prof(s: &str) -> QuantifierProfile {
        profile(&parse(s, Sort::Integer).unwrap())
    }

    #[test]
    fn quantifier_free() {
        let p = prof("(and (div x y) (not (= x 1)))");
        assert_eq!((p.universal_count, p.existential_count, p.alternation_pattern.as_str()), (0, 0, ""));
    }

    #[test]
    fn robinson_shape() {
        let p = prof("(A (a b c d e) (E (f g h i) (A (j k l) (E (m) (= a m)))))");
        assert_eq!(p.universal_count, 8);
        assert_eq!(p.existential_count, 5);
        assert_eq!(p.alternation_pattern, "∀∃∀∃");
    }

    #[test]
    fn negation_flips_and_siblings_merge() {
        let p = prof("(not (E (x) (A (y) (div x y))))");
        assert_eq!(p.alternation_pattern, "∀∃");
        let p = prof("(and (A (d) (div d x)) (A (e) (div e x)) (E (y) (= y x)))");
        assert_eq!((p.universal_count, p.existential_count), (2, 1));
        assert_eq!(p.alternation_pattern, "∃∀");
        let p = prof("(or (not (A (d) (div d x))) (E (y) (A (e) (div e y))))");
        assert_eq!(p.alternation_pattern, "∃∀");
        assert_eq!(p.existential_count, 2);
    }
}
