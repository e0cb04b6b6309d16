use crate::error::{invalid, FracError, Result};

/// Integer lattice index. One-dimensional cells use `[i, 0]`.
pub type Cell = [i32; 2];

/// Lattice discretization of a ball `Ω = B_radius(0)` inside the
/// extended lattice box `[-N h, N h]^n`.
///
/// Cell `i` covers `[i h, (i+1) h]` along each axis, so centers sit at
/// `(i + 1/2) h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    n: usize,
    radius: f64,
    h: f64,
    trunc: f64,
    half: i32,
    omega: Vec<Cell>,
    omega_index: Vec<i32>,
    layer: Vec<Cell>,
    field_index: Vec<i32>,
    boundary: Vec<usize>,
    faces: Vec<(usize, usize)>,
}

/// Builds the discrete ball domain; see [`Domain::ball`].
pub fn build_domain(n: usize, radius: f64, h: f64, trunc: f64) -> Result<Domain> {
    Domain::ball(n, radius, h, trunc)
}

impl Domain {
    /// Discrete ball of the given radius with spacing `h` and truncation
    /// radius `trunc` (the half-width of the extended lattice).
    pub fn ball(n: usize, radius: f64, h: f64, trunc: f64) -> Result<Domain> {
        if n != 1 && n != 2 {
            return Err(invalid("n", format!("dimension must be 1 or 2, got {n}")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(invalid("h", "spacing must be positive"));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(invalid("radius", "radius must be positive"));
        }
        if trunc < 2.0 * radius * (1.0 - 1e-12) {
            return Err(invalid("R", format!("R = {trunc} must be at least 2·radius = {}", 2.0 * radius)));
        }
        let half = (trunc / h - 1e-9).ceil() as i32;
        Self::assemble(n, radius, h, trunc, half)
    }

    /// Same lattice, concentric sub-ball of smaller radius.
    pub fn restrict(&self, radius: f64) -> Result<Domain> {
        if radius > self.radius {
            return Err(invalid("radius", "restriction must not enlarge the domain"));
        }
        Self::assemble(self.n, radius, self.h, self.trunc, self.half)
    }

    fn assemble(n: usize, radius: f64, h: f64, trunc: f64, half: i32) -> Result<Domain> {
        let side = (2 * half) as usize;
        let total = if n == 1 { side } else { side * side };
        let mut d = Domain {
            n,
            radius,
            h,
            trunc,
            half,
            omega: Vec::new(),
            omega_index: vec![-1; total],
            layer: Vec::new(),
            field_index: vec![-1; total],
            boundary: Vec::new(),
            faces: Vec::new(),
        };
        let cells: Vec<Cell> = d.lattice_cells().collect();
        for c in cells {
            if d.in_ball(d.center(c)) {
                let l = d.linear(c);
                d.omega_index[l] = d.omega.len() as i32;
                d.omega.push(c);
            }
        }
        // Fewer than 8 cells cannot resolve the ball (in 1D: 8 across).
        if d.omega.len() < 8 {
            return Err(FracError::UnderResolved(format!(
                "discrete ball has {} cells (need at least 8)",
                d.omega.len()
            )));
        }
        for k in 0..d.omega.len() {
            let l = d.linear(d.omega[k]);
            d.field_index[l] = k as i32;
        }
        let mut layer = Vec::new();
        let mut boundary = Vec::new();
        for (k, &c) in d.omega.iter().enumerate() {
            let mut touches = false;
            for nb in d.neighbors(c) {
                if !d.is_omega(nb) {
                    touches = true;
                    layer.push(nb);
                }
            }
            if touches {
                boundary.push(k);
            }
        }
        layer.sort_by_key(|c| d.linear(*c));
        layer.dedup();
        let no = d.omega.len();
        for (k, &c) in layer.iter().enumerate() {
            let l = d.linear(c);
            d.field_index[l] = (no + k) as i32;
        }
        d.layer = layer;
        d.boundary = boundary;
        let mut faces = Vec::new();
        for (k, &c) in d.omega.iter().enumerate() {
            for axis in 0..n {
                let mut nb = c;
                nb[axis] += 1;
                let f = d.field_index[d.linear(nb)];
                faces.push((k, f as usize));
                let mut nb = c;
                nb[axis] -= 1;
                if !d.is_omega(nb) {
                    let f = d.field_index[d.linear(nb)];
                    faces.push((f as usize, k));
                }
            }
        }
        d.faces = faces;
        Ok(d)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    /// Truncation radius `R` requested at construction.
    pub fn truncation(&self) -> f64 {
        self.trunc
    }
    /// Number of lattice cells per half-axis (`N`); the box is `[-N h, N h]^n`.
    pub fn half_cells(&self) -> i32 {
        self.half
    }
    /// Half-width `N h` of the extended lattice box.
    pub fn box_half_width(&self) -> f64 {
        self.half as f64 * self.h
    }
    /// `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.n as i32)
    }

    pub fn omega(&self) -> &[Cell] {
        &self.omega
    }
    pub fn layer(&self) -> &[Cell] {
        &self.layer
    }
    /// Ω cells having a face-neighbor outside Ω (indices into [`Domain::omega`]).
    pub fn boundary_cells(&self) -> &[usize] {
        &self.boundary
    }
    /// Faces `(a, b)` between field cells (indices into Ω ++ layer) with at
    /// least one Ω endpoint; `b` is the `+axis` neighbor of `a`.
    pub fn faces(&self) -> &[(usize, usize)] {
        &self.faces
    }
    /// Number of field cells (Ω plus boundary layer).
    pub fn field_len(&self) -> usize {
        self.omega.len() + self.layer.len()
    }
    pub fn field_cell(&self, k: usize) -> Cell {
        if k < self.omega.len() {
            self.omega[k]
        } else {
            self.layer[k - self.omega.len()]
        }
    }

    pub fn lattice_len(&self) -> usize {
        self.omega_index.len()
    }

    /// Row-major lattice index.
    #[inline]
    pub fn linear(&self, c: Cell) -> usize {
        let side = 2 * self.half;
        if self.n == 1 {
            (c[0] + self.half) as usize
        } else {
            ((c[1] + self.half) * side + (c[0] + self.half)) as usize
        }
    }

    #[inline]
    pub fn cell_of_linear(&self, l: usize) -> Cell {
        let side = (2 * self.half) as usize;
        if self.n == 1 {
            [l as i32 - self.half, 0]
        } else {
            [(l % side) as i32 - self.half, (l / side) as i32 - self.half]
        }
    }

    #[inline]
    pub fn in_lattice(&self, c: Cell) -> bool {
        let ok0 = c[0] >= -self.half && c[0] < self.half;
        if self.n == 1 {
            ok0 && c[1] == 0
        } else {
            ok0 && c[1] >= -self.half && c[1] < self.half
        }
    }

    pub fn lattice_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.lattice_len()).map(move |l| self.cell_of_linear(l))
    }

    #[inline]
    pub fn center(&self, c: Cell) -> [f64; 2] {
        let x = (c[0] as f64 + 0.5) * self.h;
        if self.n == 1 {
            [x, 0.0]
        } else {
            [x, (c[1] as f64 + 0.5) * self.h]
        }
    }

    /// Cell containing the point (floor convention).
    #[inline]
    pub fn cell_at(&self, p: [f64; 2]) -> Cell {
        let i = (p[0] / self.h).floor() as i32;
        if self.n == 1 {
            [i, 0]
        } else {
            [i, (p[1] / self.h).floor() as i32]
        }
    }

    pub fn in_ball(&self, p: [f64; 2]) -> bool {
        norm(p) < self.radius
    }

    #[inline]
    pub fn is_omega(&self, c: Cell) -> bool {
        self.in_lattice(c) && self.omega_index[self.linear(c)] >= 0
    }

    #[inline]
    pub fn omega_index(&self, c: Cell) -> Option<usize> {
        if !self.in_lattice(c) {
            return None;
        }
        let k = self.omega_index[self.linear(c)];
        (k >= 0).then_some(k as usize)
    }

    #[inline]
    pub fn field_index(&self, c: Cell) -> Option<usize> {
        if !self.in_lattice(c) {
            return None;
        }
        let k = self.field_index[self.linear(c)];
        (k >= 0).then_some(k as usize)
    }

    /// Face neighbors in the order `+x, -x, +y, -y`.
    pub fn neighbors(&self, c: Cell) -> Vec<Cell> {
        let mut v = vec![[c[0] + 1, c[1]], [c[0] - 1, c[1]]];
        if self.n == 2 {
            v.push([c[0], c[1] + 1]);
            v.push([c[0], c[1] - 1]);
        }
        v
    }

    /// Unit offset along an axis.
    pub fn unit(axis: usize, sign: i32) -> Cell {
        if axis == 0 {
            [sign, 0]
        } else {
            [0, sign]
        }
    }
}

#[inline]
pub fn norm(p: [f64; 2]) -> f64 {
    (p[0] * p[0] + p[1] * p[1]).sqrt()
}
