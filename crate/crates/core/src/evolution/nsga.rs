//! Non-dominated sorting over the (relative complexity, relative
//! readability) plane, both maximized.

/// `p` dominates `q` when it is no worse in both objectives and strictly
/// better in one.
pub fn dominates(p: (f64, f64), q: (f64, f64)) -> bool {
    p.0 >= q.0 && p.1 >= q.1 && (p.0 > q.0 || p.1 > q.1)
}

/// Partitions point indices into fronts: front 0 is the non-dominated set,
/// each later front is non-dominated once earlier fronts are removed.
/// Indices within a front are ascending.
pub fn non_dominated_sort(points: &[(f64, f64)]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(points[i], points[j]) {
                dominated_by[i].push(j);
                count[j] += 1;
            } else if dominates(points[j], points[i]) {
                dominated_by[j].push(i);
                count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// NSGA-II crowding distance of each member of one front; boundary points
/// get infinity.
pub fn crowding_distance(points: &[(f64, f64)], front: &[usize]) -> Vec<f64> {
    let mut dist = vec![0.0; front.len()];
    if front.len() <= 2 {
        return vec![f64::INFINITY; front.len()];
    }
    for obj in 0..2 {
        let value = |k: usize| if obj == 0 { points[front[k]].0 } else { points[front[k]].1 };
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)));
        let (lo, hi) = (value(order[0]), value(order[order.len() - 1]));
        dist[order[0]] = f64::INFINITY;
        dist[order[order.len() - 1]] = f64::INFINITY;
        if hi > lo {
            for w in 1..order.len() - 1 {
                dist[order[w]] += (value(order[w + 1]) - value(order[w - 1])) / (hi - lo);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        let pts = [(0.5, 0.5), (0.6, 0.4), (0.4, 0.4)];
        assert_eq!(non_dominated_sort(&pts), vec![vec![0, 1], vec![2]]);
        let same = [(0.3, 0.3); 4];
        assert_eq!(non_dominated_sort(&same), vec![vec![0, 1, 2, 3]]);
        assert!(non_dominated_sort(&[]).is_empty());
    }

    #[test]
    fn crowding_marks_boundaries() {
        let pts = [(0.1, 0.9), (0.5, 0.5), (0.9, 0.1)];
        let d = crowding_distance(&pts, &[0, 1, 2]);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert!((d[1] - 2.0).abs() < 1e-12);
    }
}
