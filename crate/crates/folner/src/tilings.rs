//! Proper tilings and monotilings restricted to finite windows, nesting
//! levels, saturations, and validation — the scaffolding for tile-entropy.
//!
//! Tilings are materialized only on finite windows; infinite tilings exist
//! solely as rules (a tile length, a level), because every downstream
//! computation is windowed.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::group::{FinPerm, FiniteSet, GroupContext, Perm, VecAdd};

/// A tile shape: a finite cell set containing the identity. Tiles are
/// right-translates `{s·c : s ∈ cells}` of a shape by a center `c`.
#[derive(Clone, Debug)]
pub struct Shape<G: GroupContext> {
    cells: FiniteSet<G::Elem>,
}

impl<G: GroupContext> Shape<G> {
    pub fn new(ctx: &G, cells: FiniteSet<G::Elem>) -> Result<Shape<G>> {
        if !cells.contains(&ctx.identity()) {
            return Err(Error::Invalid("shape must contain the identity".into()));
        }
        Ok(Shape { cells })
    }

    pub fn cells(&self) -> &FiniteSet<G::Elem> {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// A partition of a finite window into translated shapes with designated
/// centers. Every tile is `{s·c : s ∈ shape}` for one of finitely many
/// shapes; each center lies in its own tile because shapes contain the
/// identity.
#[derive(Clone, Debug)]
pub struct WindowTiling<G: GroupContext> {
    window: FiniteSet<G::Elem>,
    shapes: Vec<Shape<G>>,
    tiles: Vec<(usize, G::Elem)>,
}

impl<G: GroupContext> WindowTiling<G> {
    /// Build and fully check the partition invariants.
    pub fn new(
        ctx: &G,
        window: FiniteSet<G::Elem>,
        shapes: Vec<Shape<G>>,
        tiles: Vec<(usize, G::Elem)>,
    ) -> Result<WindowTiling<G>> {
        let tiling = WindowTiling::new_unchecked(window, shapes, tiles);
        let violations = tiling.partition_violations(ctx);
        if let Some(first) = violations.first() {
            return Err(Error::Overlap(first.clone()));
        }
        Ok(tiling)
    }

    /// Build without checking — for diagnostics and for exercising
    /// [`NestedTilingFamily::validate`] on deliberately broken input.
    pub fn new_unchecked(
        window: FiniteSet<G::Elem>,
        shapes: Vec<Shape<G>>,
        tiles: Vec<(usize, G::Elem)>,
    ) -> WindowTiling<G> {
        WindowTiling { window, shapes, tiles }
    }

    pub fn window(&self) -> &FiniteSet<G::Elem> {
        &self.window
    }

    pub fn shapes(&self) -> &[Shape<G>] {
        &self.shapes
    }

    /// Tile list as (shape index, center) pairs.
    pub fn tiles(&self) -> &[(usize, G::Elem)] {
        &self.tiles
    }

    /// The cells of tile `i`, in the shape's canonical cell order (each cell
    /// is `s·c`).
    pub fn tile_cells(&self, ctx: &G, i: usize) -> Vec<G::Elem> {
        let (shape_idx, center) = &self.tiles[i];
        self.shapes[*shape_idx]
            .cells()
            .iter()
            .map(|s| ctx.multiply(s, center))
            .collect()
    }

    /// Map every window point to the index of the tile containing it.
    /// Usable only on valid partitions (duplicates are reported by
    /// [`Self::partition_violations`] instead).
    pub fn point_to_tile(&self, ctx: &G) -> HashMap<G::Elem, usize> {
        let mut map = HashMap::new();
        for i in 0..self.tiles.len() {
            for cell in self.tile_cells(ctx, i) {
                map.insert(cell, i);
            }
        }
        map
    }

    /// Partition diagnostics: shape/identity violations, out-of-range shape
    /// indices, overlapping tiles, and window coverage mismatches. Empty
    /// means the tiling is a proper partition of its window.
    pub fn partition_violations(&self, ctx: &G) -> Vec<String> {
        let mut violations = Vec::new();
        let identity = ctx.identity();
        for (i, shape) in self.shapes.iter().enumerate() {
            if !shape.cells().contains(&identity) {
                violations.push(format!("shape {i} does not contain the identity"));
            }
        }
        let mut seen: HashMap<G::Elem, usize> = HashMap::new();
        let mut covered = 0usize;
        for (i, (shape_idx, center)) in self.tiles.iter().enumerate() {
            if *shape_idx >= self.shapes.len() {
                violations.push(format!("tile {i} references unknown shape {shape_idx}"));
                continue;
            }
            for cell in self.tile_cells(ctx, i) {
                if !self.window.contains(&cell) {
                    violations.push(format!("tile {i} leaves the window at {}", ctx.show(&cell)));
                }
                match seen.insert(cell.clone(), i) {
                    None => covered += 1,
                    Some(j) => violations.push(format!(
                        "tiles {j} and {i} overlap at {}",
                        ctx.show(&cell)
                    )),
                }
            }
            if !seen.get(center).is_some_and(|&t| t == i) {
                violations.push(format!("tile {i} does not contain its center"));
            }
        }
        if covered < self.window.len() {
            let missing = self
                .window
                .iter()
                .find(|g| !seen.contains_key(g))
                .map(|g| ctx.show(g))
                .unwrap_or_default();
            violations.push(format!(
                "window not covered: {} of {} points tiled (first gap at {missing})",
                covered,
                self.window.len()
            ));
        }
        violations
    }
}

/// A nested system of tilings of one window: level k ↦ tiling, with every
/// higher-level tile a union of lower-level tiles.
#[derive(Clone, Debug)]
pub struct NestedTilingFamily<G: GroupContext> {
    levels: Vec<(u32, WindowTiling<G>)>,
}

/// Outcome of [`NestedTilingFamily::validate`]: a list of violations, empty
/// when the family is a valid nested system of proper tilings.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_valid() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

impl<G: GroupContext> NestedTilingFamily<G> {
    /// Assemble levels (sorted by level index). Duplicate level indices are
    /// rejected; deeper structural problems are reported by
    /// [`Self::validate`] rather than rejected here, so that broken input
    /// can be diagnosed.
    pub fn new(mut levels: Vec<(u32, WindowTiling<G>)>) -> Result<NestedTilingFamily<G>> {
        if levels.is_empty() {
            return Err(Error::Empty("tiling family"));
        }
        levels.sort_by_key(|(k, _)| *k);
        if levels.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Invalid("duplicate tiling level".into()));
        }
        Ok(NestedTilingFamily { levels })
    }

    pub fn levels(&self) -> &[(u32, WindowTiling<G>)] {
        &self.levels
    }

    pub fn level(&self, k: u32) -> Option<&WindowTiling<G>> {
        self.levels.iter().find(|(l, _)| *l == k).map(|(_, t)| t)
    }

    /// Check the whole family: every level is a proper partition, all
    /// levels tile the same window, every higher-level tile is a union of
    /// lower-level tiles, and tiles of equal shape carry the same relative
    /// sub-tile pattern. An empty report means valid.
    pub fn validate(&self, ctx: &G) -> ValidationReport {
        let mut violations = Vec::new();
        for (k, tiling) in &self.levels {
            for v in tiling.partition_violations(ctx) {
                violations.push(format!("level {k}: {v}"));
            }
        }
        for pair in self.levels.windows(2) {
            let (lo_k, lo) = &pair[0];
            let (hi_k, hi) = &pair[1];
            if lo.window() != hi.window() {
                violations.push(format!("levels {lo_k} and {hi_k} tile different windows"));
                continue;
            }
            violations.extend(congruence_violations(ctx, *lo_k, lo, *hi_k, hi));
        }
        ValidationReport { violations }
    }
}

/// Check that every tile of `hi` is a union of tiles of `lo`, and that
/// `hi`-tiles of equal shape decompose into the same relative pattern of
/// `lo`-tiles (shape index and center offset measured from the `hi` center).
fn congruence_violations<G: GroupContext>(
    ctx: &G,
    lo_k: u32,
    lo: &WindowTiling<G>,
    hi_k: u32,
    hi: &WindowTiling<G>,
) -> Vec<String> {
    let mut violations = Vec::new();
    let hi_map = hi.point_to_tile(ctx);
    // Which hi-tile hosts each lo-tile; splits are congruence violations.
    let mut members: HashMap<usize, Vec<usize>> = HashMap::new();
    'tiles: for i in 0..lo.tiles().len() {
        let cells = lo.tile_cells(ctx, i);
        let mut host: Option<usize> = None;
        for cell in &cells {
            let Some(&h) = hi_map.get(cell) else { continue 'tiles };
            if *host.get_or_insert(h) != h {
                violations.push(format!(
                    "level-{lo_k} tile {i} straddles two level-{hi_k} tiles"
                ));
                continue 'tiles;
            }
        }
        if let Some(h) = host {
            members.entry(h).or_default().push(i);
        }
    }
    // Same shape ⇒ same relative sub-tile pattern.
    let mut patterns: HashMap<usize, Vec<(usize, G::Elem)>> = HashMap::new();
    for (h, (shape_idx, center)) in hi.tiles().iter().enumerate() {
        let mut pattern: Vec<(usize, G::Elem)> = members
            .remove(&h)
            .unwrap_or_default()
            .into_iter()
            .filter_map(|i| {
                let (sub_shape, sub_center) = &lo.tiles()[i];
                ctx.divide_right(sub_center, center).map(|off| (*sub_shape, off))
            })
            .collect();
        pattern.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| ctx.encode(&a.1).cmp(&ctx.encode(&b.1))));
        match patterns.get(shape_idx) {
            None => {
                patterns.insert(*shape_idx, pattern);
            }
            Some(expected) if *expected != pattern => {
                violations.push(format!(
                    "level-{hi_k} tiles of shape {shape_idx} decompose into different \
                     level-{lo_k} patterns"
                ));
            }
            Some(_) => {}
        }
    }
    violations
}

/// Consecutive length-ℓ tiles over the integer interval [a, b], centers at
/// left endpoints. Works on any carrier with a dense index (ℤ, ℕ).
pub fn interval_tiling<G: GroupContext>(ctx: &G, a: i64, b: i64, length: u32) -> Result<WindowTiling<G>> {
    if length == 0 {
        return Err(Error::Invalid("tile length must be positive".into()));
    }
    if a > b {
        return Err(Error::Invalid(format!("empty interval [{a}, {b}]")));
    }
    let span = (b - a + 1) as u64;
    if span % length as u64 != 0 {
        return Err(Error::Invalid(format!(
            "tile length {length} does not divide the window size {span}"
        )));
    }
    let elem = |i: i64| {
        ctx.from_index(i)
            .ok_or_else(|| Error::Invalid(format!("{} cannot index {i}", ctx.name())))
    };
    let cells: Vec<G::Elem> = (0..length as i64).map(elem).collect::<Result<_>>()?;
    let shape = Shape::new(ctx, FiniteSet::from_elems(cells))?;
    let window: Vec<G::Elem> = (a..=b).map(elem).collect::<Result<_>>()?;
    let tiles: Vec<(usize, G::Elem)> = (0..span / length as u64)
        .map(|j| Ok((0, elem(a + (j * length as u64) as i64)?)))
        .collect::<Result<_>>()?;
    WindowTiling::new(ctx, FiniteSet::from_elems(window), vec![shape], tiles)
}

/// Axis-aligned ℓ-cubes tiling the cube of side `size` cornered at
/// `corner`; centers at the lexicographically least cell of each tile.
pub fn cube_tiling<const D: usize>(
    ctx: &VecAdd<D>,
    corner: [i64; D],
    size: u64,
    side: u64,
) -> Result<WindowTiling<VecAdd<D>>> {
    if side == 0 || size == 0 {
        return Err(Error::Invalid("cube sides must be positive".into()));
    }
    if size % side != 0 {
        return Err(Error::Invalid(format!(
            "tile side {side} does not divide the window side {size}"
        )));
    }
    let mut shape_cells = vec![[0i64; D]];
    let mut window_cells = vec![corner];
    for axis in 0..D {
        shape_cells = shape_cells
            .iter()
            .flat_map(|c| {
                (0..side as i64).map(move |r| {
                    let mut c = *c;
                    c[axis] = r;
                    c
                })
            })
            .collect();
        window_cells = window_cells
            .iter()
            .flat_map(|c| {
                (0..size as i64).map(move |r| {
                    let mut c = *c;
                    c[axis] = corner[axis] + r;
                    c
                })
            })
            .collect();
    }
    let per_axis = size / side;
    let mut centers = vec![corner];
    for axis in 0..D {
        centers = centers
            .iter()
            .flat_map(|c| {
                (0..per_axis).map(move |j| {
                    let mut c = *c;
                    c[axis] = corner[axis] + (j * side) as i64;
                    c
                })
            })
            .collect();
    }
    let shape = Shape::new(ctx, FiniteSet::from_elems(shape_cells))?;
    let tiles = centers.into_iter().map(|c| (0, c)).collect();
    WindowTiling::new(ctx, FiniteSet::from_elems(window_cells), vec![shape], tiles)
}

/// The level-k monotiling of Sym(n): tiles Sym(k)·c over centers c with
/// increasing k-prefix. Requires 2 ≤ k ≤ n; tile count is n!/k!.
pub fn perm_monotiling(ctx: &FinPerm, k: u8, n: u8) -> Result<WindowTiling<FinPerm>> {
    if k < 2 {
        return Err(Error::Invalid(format!("monotiling level must be >= 2, got {k}")));
    }
    if k > n {
        return Err(Error::Invalid(format!("monotiling level {k} exceeds horizon {n}")));
    }
    let window = FiniteSet::from_elems(crate::folner::sym_window(n));
    let shape = Shape::new(ctx, FiniteSet::from_elems(crate::folner::sym_window(k)))?;
    let incr = crate::generators::perm_incr_indicator(k)?;
    let tiles: Vec<(usize, Perm)> = window
        .iter()
        .filter(|c| incr.contains(ctx, c))
        .map(|c| (0, c.clone()))
        .collect();
    WindowTiling::new(ctx, window, vec![shape], tiles)
}

/// The Θ-saturation of F: the union of all tiles meeting F. Contains F;
/// empty input saturates to the empty set. F must lie inside the tiled
/// window.
pub fn saturation<G: GroupContext>(
    ctx: &G,
    f: &FiniteSet<G::Elem>,
    tiling: &WindowTiling<G>,
) -> Result<FiniteSet<G::Elem>> {
    if let Some(outside) = f.iter().find(|g| !tiling.window().contains(g)) {
        return Err(Error::EscapesWindow(format!(
            "saturation input contains {} outside the tiled window",
            ctx.show(outside)
        )));
    }
    let point_map = tiling.point_to_tile(ctx);
    let mut hit: Vec<bool> = vec![false; tiling.tiles().len()];
    for g in f.iter() {
        if let Some(&t) = point_map.get(g) {
            hit[t] = true;
        }
    }
    let mut cells = Vec::new();
    for (i, is_hit) in hit.iter().enumerate() {
        if *is_hit {
            cells.extend(tiling.tile_cells(ctx, i));
        }
    }
    Ok(FiniteSet::from_elems(cells))
}
