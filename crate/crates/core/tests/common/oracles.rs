//! Reference computations kept apart from the library's own code paths.

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for k in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(k, n - 1);
            out.push(p);
        }
    }
    out
}

// bottom[j] = index of the top letter sitting at bottom position j
pub fn irreducible(bottom: &[usize]) -> bool {
    let d = bottom.len();
    (1..d).all(|k| bottom[..k].iter().any(|&t| t >= k))
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    parent[x] = r;
    r
}

/// Suspension polygon: top broken line P0..Pd, bottom Q0..Qd with shared
/// endpoints. Each letter's two sides are glued by a translation, so their
/// starts and ends are identified. One face and d edges after gluing.
pub fn genus_by_euler(bottom: &[usize]) -> usize {
    let d = bottom.len();
    // P_i -> i, Q_j -> d + 1 + j
    let mut parent: Vec<usize> = (0..2 * d + 2).collect();
    let union = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        parent[ra] = rb;
    };
    union(&mut parent, 0, d + 1);
    union(&mut parent, d, 2 * d + 1);
    for (j, &t) in bottom.iter().enumerate() {
        union(&mut parent, t, d + 1 + j);
        union(&mut parent, t + 1, d + 1 + j + 1);
    }
    let mut roots: Vec<usize> = (0..2 * d + 2).map(|x| find(&mut parent, x)).collect();
    roots.sort();
    roots.dedup();
    let v = roots.len() as i64;
    let chi = v - d as i64 + 1;
    assert!(chi <= 2 && (2 - chi) % 2 == 0, "chi = {chi}");
    ((2 - chi) / 2) as usize
}
