//! Worst-case optimal join (GenericJoin) and the nested-loop reference join.

use crate::query::{Binding, Query, Var, VarSet};
use crate::store::Value;

/// How the next attribute is picked.
#[derive(Clone, Copy, Debug)]
enum Pick<'a> {
    /// Smallest `min_F |π_v(R_F ⋉ s)|`, ties to the lowest attribute.
    Greedy,
    /// First unbound attribute of a fixed order.
    Fixed(&'a [Var]),
}

/// Answers of `⋈_{F ∈ ℰ_O} π_O(R_F ⋉ s)`, deduplicated, each listed over
/// the attributes of `o` in ascending order. `s` must already be an answer
/// of the sub-query on its bound attributes.
///
/// ```
/// use joinest::{wcoj, Binding, Database, Query};
///
/// let mut db = Database::new();
/// db.add("R", &["x", "y"], &[&[1, 2], &[2, 3], &[1, 3]]).unwrap();
/// let q = Query::parse("R(A,B), R(B,C), R(A,C)", &db).unwrap();
/// let all = wcoj::generic_join(&q, q.scope(), &Binding::new(3));
/// assert_eq!(all, vec![vec![1, 2, 3]]);
/// ```
pub fn generic_join(query: &Query, o: VarSet, s: &Binding) -> Vec<Vec<Value>> {
    let mut out = Vec::new();
    run(query, o, s, Pick::Greedy, &mut |b| {
        out.push(b.project(o));
        true
    });
    out
}

/// [`generic_join`] with attributes bound in the given order.
pub fn generic_join_ordered(query: &Query, o: VarSet, s: &Binding, order: &[Var]) -> Vec<Vec<Value>> {
    let mut out = Vec::new();
    run(query, o, s, Pick::Fixed(order), &mut |b| {
        out.push(b.project(o));
        true
    });
    out
}

/// Number of answers of [`generic_join`].
pub fn generic_join_count(query: &Query, o: VarSet, s: &Binding) -> u64 {
    let mut n = 0;
    run(query, o, s, Pick::Greedy, &mut |_| {
        n += 1;
        true
    });
    n
}

/// True when [`generic_join`] has at least one answer; stops at the first.
pub fn generic_join_exists(query: &Query, o: VarSet, s: &Binding) -> bool {
    let mut found = false;
    run(query, o, s, Pick::Greedy, &mut |_| {
        found = true;
        false
    });
    found
}

/// Calls `f` on every answer (as a full binding); `f` returns `false` to stop.
pub fn for_each_answer(query: &Query, o: VarSet, s: &Binding, mut f: impl FnMut(&Binding) -> bool) {
    run(query, o, s, Pick::Greedy, &mut f);
}

fn run(query: &Query, o: VarSet, s: &Binding, pick: Pick<'_>, f: &mut dyn FnMut(&Binding) -> bool) {
    let edges: Vec<usize> = query.edges_meeting(o).collect();
    if edges.iter().any(|&e| !query.atom(e).contains(s)) {
        return;
    }
    let mut b = s.clone();
    recurse(query, &edges, o.minus(s.bound()), &mut b, pick, f);
}

fn recurse(
    query: &Query,
    edges: &[usize],
    rem: VarSet,
    s: &mut Binding,
    pick: Pick<'_>,
    f: &mut dyn FnMut(&Binding) -> bool,
) -> bool {
    if rem.is_empty() {
        return f(s);
    }
    let meeting = |v: Var| edges.iter().copied().filter(move |&e| query.atom(e).vars().contains(v));
    let smallest = |v: Var| {
        meeting(v)
            .map(|e| (query.atom(e).distinct(s, VarSet::single(v)), e))
            .min()
            .expect("attribute lies in some edge")
    };
    let (v, (_, base)) = match pick {
        Pick::Greedy => rem
            .iter()
            .map(|v| (v, smallest(v)))
            .min_by_key(|&(v, (n, _))| (n, v))
            .unwrap(),
        Pick::Fixed(order) => {
            let v = order
                .iter()
                .copied()
                .find(|&v| rem.contains(v))
                .expect("order lists every attribute");
            (v, smallest(v))
        }
    };
    // Intersect by probing the smallest projection into the others.
    let candidates = query.atom(base).values(s, v);
    let others: Vec<usize> = meeting(v).filter(|&e| e != base).collect();
    for x in candidates {
        s.set(v, x);
        if others.iter().all(|&e| query.atom(e).contains(s)) {
            let mut next = rem;
            next.remove(v);
            if !recurse(query, edges, next, s, pick, f) {
                s.unset(v);
                return false;
            }
        }
        s.unset(v);
    }
    true
}

/// Nested-loop join over all atoms: one entry per combination of matching
/// rows, so duplicate base rows yield duplicate answers. Each answer lists
/// the query's covered attributes in ascending order.
pub fn brute_force_join(query: &Query) -> Vec<Vec<Value>> {
    let scope = query.scope();
    let tuples: Vec<(Vec<Var>, Vec<Vec<Value>>)> = query
        .atoms()
        .iter()
        .map(|a| (a.vars().iter().collect(), a.tuples()))
        .collect();
    let mut assign: Vec<Option<Value>> = vec![None; query.n_vars()];
    let mut out = Vec::new();
    nested(&tuples, 0, &mut assign, &mut |a| {
        out.push(scope.iter().map(|v| a[v].expect("covered")).collect())
    });
    out
}

fn nested(
    atoms: &[(Vec<Var>, Vec<Vec<Value>>)],
    i: usize,
    assign: &mut Vec<Option<Value>>,
    emit: &mut dyn FnMut(&[Option<Value>]),
) {
    let Some((vars, rows)) = atoms.get(i) else {
        emit(assign);
        return;
    };
    for row in rows {
        let consistent = vars
            .iter()
            .zip(row)
            .all(|(&v, &x)| assign[v].is_none_or(|y| y == x));
        if !consistent {
            continue;
        }
        let fresh: Vec<Var> = vars.iter().copied().filter(|&v| assign[v].is_none()).collect();
        for (&v, &x) in vars.iter().zip(row) {
            assign[v] = Some(x);
        }
        nested(atoms, i + 1, assign, emit);
        for v in fresh {
            assign[v] = None;
        }
    }
}

/// Sorted, deduplicated copy of a bag of answers.
pub fn distinct(mut bag: Vec<Vec<Value>>) -> Vec<Vec<Value>> {
    bag.sort_unstable();
    bag.dedup();
    bag
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Database;

    fn triangle() -> (Database, &'static str) {
        let mut db = Database::new();
        db.add("R", &["x", "y"], &[&[1, 2], &[2, 3], &[1, 3]]).unwrap();
        (db, "R(A,B), R(B,C), R(A,C)")
    }

    #[test]
    fn residual_triangle() {
        let (db, text) = triangle();
        let q = Query::parse(text, &db).unwrap();
        let s = Binding::from_pairs(3, [(0, 1), (1, 2)]);
        assert_eq!(generic_join(&q, VarSet::single(2), &s), vec![vec![3]]);
        assert_eq!(brute_force_join(&q), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn empty_relation_and_cross_product() {
        let mut db = Database::new();
        db.add("U", &["a"], &[&[1], &[2]]).unwrap();
        db.add("W", &["a"], &[&[1], &[2], &[3]]).unwrap();
        db.add("E", &["a", "b"], &[]).unwrap();
        let q = Query::parse("U(A), W(B)", &db).unwrap();
        assert_eq!(generic_join_count(&q, q.scope(), &Binding::new(2)), 6);
        assert_eq!(brute_force_join(&q).len(), 6);
        let q = Query::parse("U(A), E(A,B)", &db).unwrap();
        assert!(generic_join(&q, q.scope(), &Binding::new(2)).is_empty());
        assert!(!generic_join_exists(&q, q.scope(), &Binding::new(2)));
    }

    #[test]
    fn brute_force_keeps_duplicates() {
        let mut db = Database::new();
        db.add("R", &["a", "b"], &[&[1, 2], &[1, 2]]).unwrap();
        db.add("S", &["b", "c"], &[&[2, 5]]).unwrap();
        let q = Query::parse("R(A,B), S(B,C)", &db).unwrap();
        assert_eq!(brute_force_join(&q).len(), 2);
        assert_eq!(generic_join(&q, q.scope(), &Binding::new(3)), vec![vec![1, 2, 5]]);
    }
}
