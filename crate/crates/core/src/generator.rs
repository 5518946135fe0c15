//! Sparse assembly of the infinitesimal generator.

use std::collections::VecDeque;
use std::io::Write;

use crate::error::{Error, Result};
use crate::model::{for_each_transition, ModelParams, StateSpace};

/// Default limit on `(c+1)(m+1)`.
pub const DEFAULT_MAX_STATES: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Generator `Q` in row-sorted coordinate form.
///
/// Each row holds its off-diagonal rates in ascending column order followed by
/// nothing else; the diagonal is kept separately as the negative row sum.
#[derive(Debug, Clone)]
pub struct SparseGenerator {
    space: StateSpace,
    entries: Vec<Entry>,
    row_ptr: Vec<usize>,
    diag: Vec<f64>,
}

pub fn build_generator(params: &ModelParams) -> Result<SparseGenerator> {
    build_generator_capped(params, DEFAULT_MAX_STATES)
}

pub fn build_generator_capped(params: &ModelParams, max_states: usize) -> Result<SparseGenerator> {
    params.validate()?;
    let states = params.num_states();
    if states > max_states as u128 {
        return Err(Error::Capacity {
            states,
            cap: max_states,
        });
    }
    let space = StateSpace::new(params);
    let dim = space.len();
    let mut entries = Vec::with_capacity(dim * 5);
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut diag = Vec::with_capacity(dim);
    let mut row = Vec::with_capacity(6);

    for (i, s) in space.states().enumerate() {
        row.clear();
        for_each_transition(params, s, |to, rate| row.push((space.index(to), rate)));
        row.sort_by_key(|e| e.0);
        row_ptr.push(entries.len());
        let mut out = 0.0;
        let mut n = 0;
        while n < row.len() {
            let col = row[n].0;
            let mut value = 0.0;
            while n < row.len() && row[n].0 == col {
                value += row[n].1;
                n += 1;
            }
            out += value;
            entries.push(Entry { row: i, col, value });
        }
        diag.push(-out);
    }
    row_ptr.push(entries.len());

    Ok(SparseGenerator {
        space,
        entries,
        row_ptr,
        diag,
    })
}

impl SparseGenerator {
    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn level_width(&self) -> usize {
        self.space.level_width()
    }

    /// Off-diagonal entries of row `i`, ascending by column.
    pub fn off_diagonal(&self, i: usize) -> &[Entry] {
        &self.entries[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.diag[i]
    }

    /// `Q[i][j]`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let row = self.off_diagonal(i);
        row.binary_search_by_key(&j, |e| e.col)
            .map(|p| row[p].value)
            .unwrap_or(0.0)
    }

    /// All nonzeros (diagonal included) in row-major order.
    pub fn triplets(&self) -> Vec<Entry> {
        let mut out = Vec::with_capacity(self.entries.len() + self.dim());
        for i in 0..self.dim() {
            let row = self.off_diagonal(i);
            let split = row.partition_point(|e| e.col < i);
            out.extend_from_slice(&row[..split]);
            out.push(Entry {
                row: i,
                col: i,
                value: self.diag[i],
            });
            out.extend_from_slice(&row[split..]);
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.entries.len() + self.dim()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.off_diagonal(i).iter().map(|e| e.value).sum::<f64>() + self.diag[i]
    }

    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.dim()).map(|i| self.row_sum(i).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diagonal(&self) -> f64 {
        self.diag.iter().map(|d| d.abs()).fold(0.0, f64::max)
    }

    /// Every off-diagonal strictly positive, every diagonal strictly negative.
    pub fn has_valid_signs(&self) -> bool {
        self.entries.iter().all(|e| e.value > 0.0 && e.row != e.col)
            && self.diag.iter().all(|&d| d < 0.0)
    }

    /// Nonzeros confined to `|level(row) - level(col)| <= 1`.
    pub fn is_block_tridiagonal(&self) -> bool {
        self.entries.iter().all(|e| {
            let (a, b) = (self.space.level_of(e.row), self.space.level_of(e.col));
            a.abs_diff(b) <= 1
        })
    }

    /// Number of states not strongly connected to state 0.
    pub fn unconnected_states(&self) -> usize {
        let n = self.dim();
        let forward = self.reach(|i, f| {
            for e in self.off_diagonal(i) {
                f(e.col)
            }
        });
        let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.entries {
            incoming[e.col].push(e.row);
        }
        let backward = self.reach(|i, f| {
            for &r in &incoming[i] {
                f(r)
            }
        });
        (0..n).filter(|&i| !(forward[i] && backward[i])).count()
    }

    fn reach(&self, neighbours: impl Fn(usize, &mut dyn FnMut(usize))) -> Vec<bool> {
        let mut seen = vec![false; self.dim()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            neighbours(i, &mut |j| {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            });
        }
        seen
    }

    pub fn is_irreducible(&self) -> bool {
        self.unconnected_states() == 0
    }

    pub fn check_irreducible(&self) -> Result<()> {
        match self.unconnected_states() {
            0 => Ok(()),
            unreached => Err(Error::Reducible {
                unreached,
                dim: self.dim(),
            }),
        }
    }

    /// Dense `(lower, diagonal, upper)` blocks of level `l`: the blocks
    /// `Q[l][l-1]`, `Q[l][l]` and `Q[l][l+1]`. `lower` is `None` at `l = 0`,
    /// `upper` is `None` at `l = c`.
    pub fn extract_level_blocks(&self, l: u32) -> Result<LevelBlocks> {
        if l > self.space.c() {
            return Err(Error::Domain(format!("level {l} outside [0, {}]", self.space.c())));
        }
        let block = |to: u32| -> DenseBlock {
            let w = self.level_width();
            let rows = self.space.level_range(l);
            let cols = self.space.level_range(to);
            let mut out = DenseBlock::zeros(w);
            for (r, i) in rows.enumerate() {
                for (cc, j) in cols.clone().enumerate() {
                    out.set(r, cc, self.get(i, j));
                }
            }
            out
        };
        Ok(LevelBlocks {
            lower: (l > 0).then(|| block(l - 1)),
            diagonal: block(l),
            upper: (l < self.space.c()).then(|| block(l + 1)),
        })
    }

    /// Coordinate dump: one `row col value` line per nonzero, 17 significant digits.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> Result<()> {
        for e in self.triplets() {
            writeln!(w, "{} {} {:.16e}", e.row, e.col, e.value)?;
        }
        Ok(())
    }

    /// Adds `delta` to one diagonal entry, breaking the zero row sum. Used by
    /// the validation suite's fault injection.
    #[doc(hidden)]
    pub fn inject_diagonal_fault(&mut self, row: usize, delta: f64) {
        self.diag[row] += delta;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseBlock {
    n: usize,
    data: Vec<f64>,
}

impl DenseBlock {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] = v;
    }
}

#[derive(Debug, Clone)]
pub struct LevelBlocks {
    pub lower: Option<DenseBlock>,
    pub diagonal: DenseBlock,
    pub upper: Option<DenseBlock>,
}
