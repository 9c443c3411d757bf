//! Dense GF(2) linear algebra on bit-packed rows, sized for the test oracle.

/// A dense GF(2) matrix with an attached right-hand side column.
#[derive(Debug, Clone)]
pub struct Gf2System {
    /// Row-major bit rows, `words` u64 words per row.
    rows: Vec<u64>,
    rhs: Vec<bool>,
    n_rows: usize,
    n_cols: usize,
    words: usize,
}

impl Gf2System {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        let words = n_cols.div_ceil(64);
        Self {
            rows: vec![0; n_rows * words],
            rhs: vec![false; n_rows],
            n_rows,
            n_cols,
            words,
        }
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        let w = row * self.words + col / 64;
        let bit = 1u64 << (col % 64);
        if value {
            self.rows[w] |= bit;
        } else {
            self.rows[w] &= !bit;
        }
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        let w = row * self.words + col / 64;
        (self.rows[w] >> (col % 64)) & 1 == 1
    }

    pub fn set_rhs(&mut self, row: usize, value: bool) {
        self.rhs[row] = value;
    }

    fn xor_rows(&mut self, target: usize, source: usize) {
        let (t, s) = (target * self.words, source * self.words);
        for k in 0..self.words {
            let v = self.rows[s + k];
            self.rows[t + k] ^= v;
        }
        self.rhs[target] ^= self.rhs[source];
    }

    fn row_is_zero(&self, row: usize) -> bool {
        self.rows[row * self.words..(row + 1) * self.words]
            .iter()
            .all(|&w| w == 0)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.words {
            self.rows.swap(a * self.words + k, b * self.words + k);
        }
        self.rhs.swap(a, b);
    }

    /// Reduced row echelon form. Returns the pivot column per pivot row, or
    /// None when some row reduces to `0 = 1` (inconsistent system).
    pub fn solve(mut self) -> Gf2Solution {
        let mut pivots: Vec<usize> = Vec::new();
        let mut rank = 0usize;
        for col in 0..self.n_cols {
            let mut sel = None;
            for row in rank..self.n_rows {
                if self.get(row, col) {
                    sel = Some(row);
                    break;
                }
            }
            let Some(sel) = sel else { continue };
            self.swap_rows(rank, sel);
            for row in 0..self.n_rows {
                if row != rank && self.get(row, col) {
                    self.xor_rows(row, rank);
                }
            }
            pivots.push(col);
            rank += 1;
            if rank == self.n_rows {
                break;
            }
        }
        let mut consistent = true;
        for row in rank..self.n_rows {
            if self.row_is_zero(row) && self.rhs[row] {
                consistent = false;
                break;
            }
        }
        Gf2Solution {
            system: self,
            pivots,
            rank,
            consistent,
        }
    }
}

/// Result of reducing a [`Gf2System`] to reduced row echelon form.
#[derive(Debug, Clone)]
pub struct Gf2Solution {
    system: Gf2System,
    pivots: Vec<usize>,
    rank: usize,
    consistent: bool,
}

impl Gf2Solution {
    pub fn consistent(&self) -> bool {
        self.consistent
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n_cols(&self) -> usize {
        self.system.n_cols
    }

    /// Unique when consistent and every column is a pivot.
    pub fn is_unique(&self) -> bool {
        self.consistent && self.rank == self.system.n_cols
    }

    /// The unique solution vector (only valid when [`is_unique`]).
    ///
    /// [`is_unique`]: Self::is_unique
    pub fn unique_solution(&self) -> Option<Vec<bool>> {
        if !self.is_unique() {
            return None;
        }
        let mut x = vec![false; self.system.n_cols];
        for (row, &col) in self.pivots.iter().enumerate() {
            x[col] = self.system.rhs[row];
        }
        Some(x)
    }

    /// Per-column determination: a variable is determined when it takes the
    /// same value in every solution, i.e. it is a pivot whose row involves no
    /// free column. Returns `(col, value)` pairs. Empty when inconsistent.
    pub fn determined(&self) -> Vec<(usize, bool)> {
        if !self.consistent {
            return Vec::new();
        }
        let mut is_pivot = vec![false; self.system.n_cols];
        for &c in &self.pivots {
            is_pivot[c] = true;
        }
        let mut out = Vec::new();
        for (row, &col) in self.pivots.iter().enumerate() {
            let mut has_free = false;
            for c in 0..self.system.n_cols {
                if c != col && self.system.get(row, c) && !is_pivot[c] {
                    has_free = true;
                    break;
                }
            }
            if !has_free {
                out.push((col, self.system.rhs[row]));
            }
        }
        out
    }

    /// One arbitrary solution with all free variables set to `fill`.
    pub fn any_solution(&self, fill: bool) -> Option<Vec<bool>> {
        if !self.consistent {
            return None;
        }
        let mut is_pivot = vec![false; self.system.n_cols];
        for &c in &self.pivots {
            is_pivot[c] = true;
        }
        let mut x = vec![false; self.system.n_cols];
        for c in 0..self.system.n_cols {
            if !is_pivot[c] {
                x[c] = fill;
            }
        }
        for (row, &col) in self.pivots.iter().enumerate() {
            let mut v = self.system.rhs[row];
            for c in 0..self.system.n_cols {
                if c != col && self.system.get(row, c) && x[c] {
                    v ^= true;
                }
            }
            x[col] = v;
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unique_system() {
        // x0 ^ x1 = 1, x1 = 1 -> x0 = 0, x1 = 1
        let mut s = Gf2System::new(2, 2);
        s.set(0, 0, true);
        s.set(0, 1, true);
        s.set_rhs(0, true);
        s.set(1, 1, true);
        s.set_rhs(1, true);
        let sol = s.solve();
        assert!(sol.is_unique());
        assert_eq!(sol.unique_solution().unwrap(), vec![false, true]);
    }

    #[test]
    fn inconsistent_system() {
        let mut s = Gf2System::new(2, 1);
        s.set(0, 0, true);
        s.set_rhs(0, true);
        s.set(1, 0, true);
        s.set_rhs(1, false);
        let sol = s.solve();
        assert!(!sol.consistent());
    }

    #[test]
    fn ambiguous_with_partially_determined() {
        // x0 = 1; x1 ^ x2 = 0 -> x0 determined, x1/x2 free.
        let mut s = Gf2System::new(2, 3);
        s.set(0, 0, true);
        s.set_rhs(0, true);
        s.set(1, 1, true);
        s.set(1, 2, true);
        let sol = s.solve();
        assert!(sol.consistent());
        assert!(!sol.is_unique());
        assert_eq!(sol.determined(), vec![(0, true)]);
        let any = sol.any_solution(false).unwrap();
        assert!(any[0]);
        assert_eq!(any[1], any[2]);
    }

    #[test]
    fn any_solution_satisfies_rows() {
        let mut s = Gf2System::new(3, 5);
        let rows: [(usize, &[usize], bool); 3] =
            [(0, &[0, 2, 4], true), (1, &[1, 2], false), (2, &[0, 1, 3], true)];
        for &(r, cols, b) in &rows {
            for &c in cols {
                s.set(r, c, true);
            }
            s.set_rhs(r, b);
        }
        let sol = s.solve();
        let x = sol.any_solution(true).unwrap();
        for &(_, cols, b) in &rows {
            let acc = cols.iter().fold(false, |a, &c| a ^ x[c]);
            assert_eq!(acc, b);
        }
    }
}
