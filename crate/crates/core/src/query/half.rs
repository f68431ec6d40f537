use std::cmp::Ordering;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

use super::cover::fractional_edge_cover;
use super::{FractionalEdgeCover, Query, Var, VarSet};
use crate::error::{Error, Result};

/// One connected piece of the support of a half-integral cover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Component {
    /// Edges with weight 1 sharing `center`; `leaves[i]` is the other end
    /// of `edges[i]`.
    Star {
        center: Var,
        leaves: Vec<Var>,
        edges: Vec<usize>,
    },
    /// Edges with weight 1/2 forming a cycle of odd length `2n + 1`.
    /// `vertices` runs `u_1, v_1, …, u_n, v_n, w`; `edges[i]` joins
    /// `vertices[i]` and `vertices[(i + 1) % len]`, so the edges
    /// `{u_i, v_i}` sit at even positions below `2n` and `edges[2n]` is the
    /// closing edge `{w, u_1}`.
    OddCycle { vertices: Vec<Var>, edges: Vec<usize> },
}

impl Component {
    pub fn vars(&self) -> VarSet {
        match self {
            Component::Star { center, leaves, .. } => {
                leaves.iter().copied().chain([*center]).collect()
            }
            Component::OddCycle { vertices, .. } => vertices.iter().copied().collect(),
        }
    }

    pub fn edges(&self) -> &[usize] {
        match self {
            Component::Star { edges, .. } | Component::OddCycle { edges, .. } => edges,
        }
    }
}

/// Vertex-disjoint stars and odd cycles covering a graph query, plus the
/// edges left at weight 0.
#[derive(Clone, Debug)]
pub struct ComponentPlan {
    pub components: Vec<Component>,
    pub unused_edges: Vec<usize>,
    pub cover: FractionalEdgeCover,
}

impl ComponentPlan {
    /// Number of components `d`.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Optimal cover with weights in `{0, 1/2, 1}` whose support splits into
/// vertex-disjoint odd cycles (weight 1/2) and stars (weight 1). Found by
/// enumerating the grid; ties go to the lexicographically smallest weights.
pub fn half_integral_cover(query: &Query) -> Result<ComponentPlan> {
    let atoms = query.atoms();
    if let Some(a) = atoms.iter().find(|a| a.vars().len() != 2) {
        return Err(Error::Unsupported(format!(
            "component sampling needs binary edges; `{}` has {} attributes",
            a.relation().name(),
            a.vars().len()
        )));
    }
    let m = atoms.len();
    if m > 14 {
        return Err(Error::Unsupported("more than 14 edges".into()));
    }
    let ends: Vec<(Var, Var)> = atoms
        .iter()
        .map(|a| {
            let mut it = a.vars().iter();
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    let sizes = query.sizes();
    let scope = query.scope();

    // Halves h_F = 2 x_F; objective compared as Π |R_F|^{h_F}.
    let mut best: Option<(BigUint, Vec<u8>, Vec<Component>)> = None;
    let mut h = vec![0u8; m];
    let total = 3usize.pow(m as u32);
    for code in 0..total {
        let mut c = code;
        for i in (0..m).rev() {
            h[i] = (c % 3) as u8;
            c /= 3;
        }
        let covered = scope.iter().all(|v| {
            ends.iter()
                .zip(&h)
                .filter(|((a, b), _)| *a == v || *b == v)
                .map(|(_, &x)| x as u32)
                .sum::<u32>()
                >= 2
        });
        if !covered {
            continue;
        }
        let obj = h.iter().zip(&sizes).fold(BigUint::one(), |acc, (&x, &n)| {
            acc * BigUint::from(n.max(1)).pow(x as u32)
        });
        if best.as_ref().is_some_and(|(b, _, _)| obj >= *b) {
            continue;
        }
        if let Some(comps) = support_components(&ends, &h) {
            best = Some((obj, h.clone(), comps));
        }
    }
    let (_, h, components) = best.ok_or_else(|| {
        Error::Unsupported("no half-integral cover with star/odd-cycle support".into())
    })?;
    let weights: Vec<BigRational> = h
        .iter()
        .map(|&x| BigRational::new(x.into(), 2.into()))
        .collect();
    let cover = FractionalEdgeCover::new(weights, sizes);
    let lp = fractional_edge_cover(query);
    if cover.agm().cmp_exact(&lp.agm()) != Ordering::Equal {
        return Err(Error::Unsupported(
            "half-integral optimum differs from the LP optimum".into(),
        ));
    }
    let unused_edges = (0..m).filter(|&e| h[e] == 0).collect();
    Ok(ComponentPlan {
        components,
        unused_edges,
        cover,
    })
}

/// Splits the support of `h` into components, or `None` when some component
/// is neither a weight-1 star nor a weight-1/2 odd cycle.
fn support_components(ends: &[(Var, Var)], h: &[u8]) -> Option<Vec<Component>> {
    let support: Vec<usize> = (0..h.len()).filter(|&e| h[e] > 0).collect();
    let mut seen = vec![false; support.len()];
    let mut comps = Vec::new();
    for start in 0..support.len() {
        if seen[start] {
            continue;
        }
        // Flood fill over shared endpoints.
        let mut members = vec![start];
        seen[start] = true;
        let mut verts = VarSet::EMPTY;
        let (a, b) = ends[support[start]];
        verts.insert(a);
        verts.insert(b);
        loop {
            let next = (0..support.len()).find(|&j| {
                let (a, b) = ends[support[j]];
                !seen[j] && (verts.contains(a) || verts.contains(b))
            });
            let Some(j) = next else { break };
            seen[j] = true;
            members.push(j);
            let (a, b) = ends[support[j]];
            verts.insert(a);
            verts.insert(b);
        }
        let edges: Vec<usize> = members.iter().map(|&j| support[j]).collect();
        let weight = h[edges[0]];
        if edges.iter().any(|&e| h[e] != weight) {
            return None;
        }
        let degree = |v: Var| edges.iter().filter(|&&e| ends[e].0 == v || ends[e].1 == v).count();
        if weight == 2 {
            // A star: some vertex touches every edge.
            let center = verts.iter().find(|&v| degree(v) == edges.len())?;
            if verts.len() != edges.len() + 1 {
                return None;
            }
            let leaves = edges
                .iter()
                .map(|&e| if ends[e].0 == center { ends[e].1 } else { ends[e].0 })
                .collect();
            comps.push(Component::Star {
                center,
                leaves,
                edges,
            });
        } else {
            if edges.len() != verts.len() || edges.len() % 2 == 0 || verts.iter().any(|v| degree(v) != 2) {
                return None;
            }
            comps.push(walk_cycle(ends, &edges, verts));
        }
    }
    comps.sort_by_key(|c| c.vars().min());
    Some(comps)
}

/// Orders a cycle starting at its smallest vertex, heading to the smaller
/// of its two neighbours.
fn walk_cycle(ends: &[(Var, Var)], edges: &[usize], verts: VarSet) -> Component {
    let other = |e: usize, v: Var| if ends[e].0 == v { ends[e].1 } else { ends[e].0 };
    let start = verts.min().unwrap();
    let mut incident: Vec<usize> = edges
        .iter()
        .copied()
        .filter(|&e| ends[e].0 == start || ends[e].1 == start)
        .collect();
    incident.sort_by_key(|&e| other(e, start));
    let mut vertices = vec![start];
    let mut order = vec![incident[0]];
    let mut cur = other(incident[0], start);
    while cur != start {
        vertices.push(cur);
        let last = *order.last().unwrap();
        let e = edges
            .iter()
            .copied()
            .find(|&e| e != last && (ends[e].0 == cur || ends[e].1 == cur))
            .unwrap();
        order.push(e);
        cur = other(e, cur);
    }
    Component::OddCycle {
        vertices,
        edges: order,
    }
}
