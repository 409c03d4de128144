//! Ordered labeled trees and the Zhang-Shasha tree edit distance.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree<L> {
    pub label: L,
    pub children: Vec<Tree<L>>,
}

impl<L> Tree<L> {
    pub fn leaf(label: L) -> Self {
        Tree {
            label,
            children: Vec::new(),
        }
    }

    pub fn node(label: L, children: Vec<Tree<L>>) -> Self {
        Tree { label, children }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Tree::size).sum::<usize>()
    }

    pub fn map<M>(&self, f: &impl Fn(&L) -> M) -> Tree<M> {
        Tree {
            label: f(&self.label),
            children: self.children.iter().map(|c| c.map(f)).collect(),
        }
    }
}

/// Post-order flattening: labels plus the leftmost leaf descendant of each
/// node.
struct Flat<'a, L> {
    labels: Vec<&'a L>,
    leftmost: Vec<usize>,
    keyroots: Vec<usize>,
}

impl<'a, L> Flat<'a, L> {
    fn new(tree: &'a Tree<L>) -> Self {
        let mut flat = Flat {
            labels: Vec::new(),
            leftmost: Vec::new(),
            keyroots: Vec::new(),
        };
        flat.visit(tree);
        let n = flat.labels.len();
        // a keyroot is the highest-numbered node for its leftmost leaf
        let mut seen = vec![false; n];
        for i in (0..n).rev() {
            let l = flat.leftmost[i];
            if !seen[l] {
                seen[l] = true;
                flat.keyroots.push(i);
            }
        }
        flat.keyroots.reverse();
        flat
    }

    fn visit(&mut self, tree: &'a Tree<L>) -> usize {
        let mut first_leaf = None;
        for child in &tree.children {
            let c = self.visit(child);
            first_leaf.get_or_insert(self.leftmost[c]);
        }
        let idx = self.labels.len();
        self.labels.push(&tree.label);
        self.leftmost.push(first_leaf.unwrap_or(idx));
        idx
    }
}

/// Ordered tree edit distance with unit insertion and deletion costs and a
/// caller-supplied relabel cost (Zhang & Shasha, 1989).
pub fn tree_edit_distance<L>(a: &Tree<L>, b: &Tree<L>, relabel: impl Fn(&L, &L) -> f64) -> f64 {
    let fa = Flat::new(a);
    let fb = Flat::new(b);
    let (n, m) = (fa.labels.len(), fb.labels.len());
    let mut treedist = vec![vec![0.0f64; m]; n];
    let mut forest = vec![vec![0.0f64; m + 1]; n + 1];

    for &i in &fa.keyroots {
        for &j in &fb.keyroots {
            let li = fa.leftmost[i];
            let lj = fb.leftmost[j];
            // forest[x][y]: distance between a[li..li+x] and b[lj..lj+y]
            let rows = i - li + 1;
            let cols = j - lj + 1;
            forest[0][0] = 0.0;
            for x in 1..=rows {
                forest[x][0] = forest[x - 1][0] + 1.0;
            }
            for y in 1..=cols {
                forest[0][y] = forest[0][y - 1] + 1.0;
            }
            for x in 1..=rows {
                let di = li + x - 1;
                for y in 1..=cols {
                    let dj = lj + y - 1;
                    let del = forest[x - 1][y] + 1.0;
                    let ins = forest[x][y - 1] + 1.0;
                    if fa.leftmost[di] == li && fb.leftmost[dj] == lj {
                        let sub = forest[x - 1][y - 1] + relabel(fa.labels[di], fb.labels[dj]);
                        let best = del.min(ins).min(sub);
                        forest[x][y] = best;
                        treedist[di][dj] = best;
                    } else {
                        let px = fa.leftmost[di] - li;
                        let py = fb.leftmost[dj] - lj;
                        let sub = forest[px][py] + treedist[di][dj];
                        forest[x][y] = del.min(ins).min(sub);
                    }
                }
            }
        }
    }
    treedist[n - 1][m - 1]
}

pub fn unit_relabel<L: PartialEq>(a: &L, b: &L) -> f64 {
    if a == b {
        0.0
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(label: char, children: Vec<Tree<char>>) -> Tree<char> {
        Tree::node(label, children)
    }

    fn l(label: char) -> Tree<char> {
        Tree::leaf(label)
    }

    #[test]
    fn identical_trees_have_zero_distance() {
        let a = t('a', vec![l('b'), t('c', vec![l('d')])]);
        assert_eq!(tree_edit_distance(&a, &a, unit_relabel), 0.0);
        assert_eq!(a.size(), 4);
    }

    #[test]
    fn single_operations() {
        let a = t('t', vec![t('r', vec![l('d')])]);
        let b = t('t', vec![t('r', vec![l('d'), l('d')])]);
        assert_eq!(tree_edit_distance(&a, &b, unit_relabel), 1.0);
        assert_eq!(tree_edit_distance(&b, &a, unit_relabel), 1.0);
        let c = t('t', vec![t('r', vec![l('e')])]);
        assert_eq!(tree_edit_distance(&a, &c, unit_relabel), 1.0);
    }

    #[test]
    fn classic_example() {
        // f(d(a, c(b)), e) vs f(c(d(a, b)), e): distance 2
        let a = t('f', vec![t('d', vec![l('a'), t('c', vec![l('b')])]), l('e')]);
        let b = t('f', vec![t('c', vec![t('d', vec![l('a'), l('b')])]), l('e')]);
        assert_eq!(tree_edit_distance(&a, &b, unit_relabel), 2.0);
    }
}
