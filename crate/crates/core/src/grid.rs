//! Lazily allocated tiled storage over a bounded site rectangle.

use crate::lattice::SiteCoord;

const SHIFT: u32 = 6;
const TILE: i32 = 1 << SHIFT;
const MASK: i32 = TILE - 1;

/// Per-site scratch over `[xmin, xmax] × [ymin, ymax]`; tiles are allocated on first write.
pub struct TiledGrid<T: Copy> {
    xmin: i32,
    ymin: i32,
    xmax: i32,
    ymax: i32,
    tiles_x: usize,
    tiles: Vec<Option<Box<[T]>>>,
    fill: T,
    allocated: usize,
}

impl<T: Copy> TiledGrid<T> {
    pub fn new(xmin: i32, xmax: i32, ymin: i32, ymax: i32, fill: T) -> Self {
        let tiles_x = ((xmax - xmin) / TILE + 1) as usize;
        let tiles_y = ((ymax - ymin) / TILE + 1) as usize;
        Self {
            xmin,
            ymin,
            xmax,
            ymax,
            tiles_x,
            tiles: (0..tiles_x * tiles_y).map(|_| None).collect(),
            fill,
            allocated: 0,
        }
    }

    #[inline]
    pub fn in_bounds(&self, s: SiteCoord) -> bool {
        s.x >= self.xmin && s.x <= self.xmax && s.y >= self.ymin && s.y <= self.ymax
    }

    #[inline]
    fn locate(&self, s: SiteCoord) -> (usize, usize) {
        let dx = s.x - self.xmin;
        let dy = s.y - self.ymin;
        let tile = (dy >> SHIFT) as usize * self.tiles_x + (dx >> SHIFT) as usize;
        let cell = ((dy & MASK) << SHIFT | (dx & MASK)) as usize;
        (tile, cell)
    }

    /// Value at `s`; out-of-bounds and untouched sites read the fill value.
    #[inline]
    pub fn get(&self, s: SiteCoord) -> T {
        if !self.in_bounds(s) {
            return self.fill;
        }
        let (t, c) = self.locate(s);
        match &self.tiles[t] {
            Some(tile) => tile[c],
            None => self.fill,
        }
    }

    /// Mutable slot at `s`, which must be in bounds.
    #[inline]
    pub fn get_mut(&mut self, s: SiteCoord) -> &mut T {
        debug_assert!(self.in_bounds(s));
        let (t, c) = self.locate(s);
        let fill = self.fill;
        let slot = &mut self.tiles[t];
        if slot.is_none() {
            *slot = Some(vec![fill; (TILE * TILE) as usize].into_boxed_slice());
            self.allocated += 1;
        }
        &mut slot.as_mut().unwrap()[c]
    }

    #[inline]
    pub fn set(&mut self, s: SiteCoord, v: T) {
        *self.get_mut(s) = v;
    }

    pub fn allocated_tiles(&self) -> usize {
        self.allocated
    }
}
