//! Time-dependent drift fields `b(t,x)`: constant vectors, closed-form
//! expressions in a minimal arithmetic grammar, or tabulated grids with
//! multilinear interpolation.
//!
//! The expression grammar is deliberately small — `+ - * / ^`, numbers,
//! parentheses, `t`, coordinates `x1..x3` (`x` aliases `x1`), the boundary
//! distance `rho(x)` and the norm `|x|` — just enough to express the drifts
//! the verification suites exercise (constants, boundary-singular powers
//! like `rho(x)^-0.9`, mild time modulation).

use crate::domain::{Domain, Point};
use crate::error::{Error, Result};

/// One parsed expression (component of a drift field).
#[derive(Debug, Clone)]
enum Expr {
    Num(f64),
    T,
    Coord(usize),
    Rho,
    NormX,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
}

impl Expr {
    fn eval(&self, t: f64, x: &Point, rho: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::T => t,
            Expr::Coord(i) => x.0[*i],
            Expr::Rho => rho,
            Expr::NormX => x.norm(),
            Expr::Neg(e) => -e.eval(t, x, rho),
            Expr::Add(a, b) => a.eval(t, x, rho) + b.eval(t, x, rho),
            Expr::Sub(a, b) => a.eval(t, x, rho) - b.eval(t, x, rho),
            Expr::Mul(a, b) => a.eval(t, x, rho) * b.eval(t, x, rho),
            Expr::Div(a, b) => a.eval(t, x, rho) / b.eval(t, x, rho),
            Expr::Pow(a, b) => a.eval(t, x, rho).powf(b.eval(t, x, rho)),
        }
    }

    fn depends_on_t(&self) -> bool {
        match self {
            Expr::T => true,
            Expr::Num(_) | Expr::Coord(_) | Expr::Rho | Expr::NormX => false,
            Expr::Neg(e) => e.depends_on_t(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.depends_on_t() || b.depends_on_t(),
        }
    }
}

// ---- recursive-descent parser ----

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::DriftParse(format!("{msg} at byte {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            // right-associative; allow a signed exponent
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(b'|') => {
                // |x|
                self.pos += 1;
                self.skip_ws();
                if !self.src[self.pos..].starts_with(b"x") {
                    return Err(self.err("expected x inside |...|"));
                }
                self.pos += 1;
                if !self.eat(b'|') {
                    return Err(self.err("expected closing '|'"));
                }
                Ok(Expr::NormX)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c == b'r' || c == b't' || c == b'x' => self.ident(),
            _ => Err(self.err("expected expression")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E')
                && self.pos + 1 < self.src.len()
                && (self.src[self.pos + 1].is_ascii_digit()
                    || self.src[self.pos + 1] == b'-'
                    || self.src[self.pos + 1] == b'+')
            {
                self.pos += 2;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| self.err("bad number"))
    }

    fn ident(&mut self) -> Result<Expr> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        if rest.starts_with(b"rho(x)") {
            self.pos += 6;
            return Ok(Expr::Rho);
        }
        if rest.starts_with(b"t") {
            self.pos += 1;
            return Ok(Expr::T);
        }
        if rest.starts_with(b"x1") || rest.starts_with(b"x2") || rest.starts_with(b"x3") {
            let i = (rest[1] - b'1') as usize;
            if i >= self.dim {
                return Err(self.err("coordinate index exceeds dimension"));
            }
            self.pos += 2;
            return Ok(Expr::Coord(i));
        }
        if rest.starts_with(b"x") {
            self.pos += 1;
            return Ok(Expr::Coord(0));
        }
        Err(self.err("unknown identifier"))
    }
}

fn parse_expr(src: &str, dim: usize) -> Result<Expr> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        dim,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

/// Tabulated drift on a tensor grid in (t, x) with multilinear interpolation.
#[derive(Debug, Clone)]
pub struct DriftTable {
    pub t_grid: Vec<f64>,
    /// per-axis spatial grids
    pub x_grids: Vec<Vec<f64>>,
    /// values[component][t_idx][flattened spatial index]
    pub values: Vec<Vec<Vec<f64>>>,
}

impl DriftTable {
    /// Parse rows `t, x1..xd, b1..bd` (CSV with a header line) into a tensor
    /// grid; every grid combination must be present exactly once.
    pub fn from_csv(text: &str, dim: usize) -> Result<Self> {
        let mut rows: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.chars().any(|c| c.is_alphabetic())) {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("drift CSV line {}: {e}", lineno + 1)))?;
            if cols.len() != 1 + 2 * dim {
                return Err(Error::Config(format!(
                    "drift CSV line {}: expected {} columns, got {}",
                    lineno + 1,
                    1 + 2 * dim,
                    cols.len()
                )));
            }
            rows.push((
                cols[0],
                cols[1..1 + dim].to_vec(),
                cols[1 + dim..].to_vec(),
            ));
        }
        if rows.is_empty() {
            return Err(Error::Config("drift CSV has no data rows".into()));
        }
        let mut t_grid: Vec<f64> = rows.iter().map(|r| r.0).collect();
        t_grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        t_grid.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        let mut x_grids = vec![Vec::<f64>::new(); dim];
        for (k, grid) in x_grids.iter_mut().enumerate() {
            let mut g: Vec<f64> = rows.iter().map(|r| r.1[k]).collect();
            g.sort_by(|a, b| a.partial_cmp(b).unwrap());
            g.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
            *grid = g;
        }
        let nspace: usize = x_grids.iter().map(|g| g.len()).product();
        let expected = t_grid.len() * nspace;
        if rows.len() != expected {
            return Err(Error::Config(format!(
                "drift CSV is not a full tensor grid: {} rows, expected {}",
                rows.len(),
                expected
            )));
        }
        let find = |g: &[f64], v: f64| -> usize {
            g.iter()
                .position(|&u| (u - v).abs() < 1e-12 * (1.0 + v.abs()))
                .unwrap()
        };
        let mut values = vec![vec![vec![f64::NAN; nspace]; t_grid.len()]; dim];
        for (t, x, b) in &rows {
            let it = find(&t_grid, *t);
            let mut flat = 0usize;
            for k in 0..dim {
                flat = flat * x_grids[k].len() + find(&x_grids[k], x[k]);
            }
            for k in 0..dim {
                values[k][it][flat] = b[k];
            }
        }
        Ok(Self {
            t_grid,
            x_grids,
            values,
        })
    }

    fn bracket(grid: &[f64], v: f64) -> Option<(usize, f64)> {
        if grid.len() == 1 {
            return if (v - grid[0]).abs() < 1e-12 {
                Some((0, 0.0))
            } else {
                None
            };
        }
        if v < grid[0] - 1e-12 || v > grid[grid.len() - 1] + 1e-12 {
            return None;
        }
        let i = grid.partition_point(|&u| u <= v).clamp(1, grid.len() - 1) - 1;
        let h = grid[i + 1] - grid[i];
        Some((i, ((v - grid[i]) / h).clamp(0.0, 1.0)))
    }

    fn eval(&self, t: f64, x: &Point) -> Result<Vec<f64>> {
        let dim = self.x_grids.len();
        let Some((it, ft)) = Self::bracket(&self.t_grid, t) else {
            return Err(Error::DriftExtrapolation { t, x: x.0.clone() });
        };
        let mut brackets = Vec::with_capacity(dim);
        for k in 0..dim {
            let Some(br) = Self::bracket(&self.x_grids[k], x.0[k]) else {
                return Err(Error::DriftExtrapolation { t, x: x.0.clone() });
            };
            brackets.push(br);
        }
        let strides: Vec<usize> = {
            let mut s = vec![1usize; dim];
            for k in (0..dim.saturating_sub(1)).rev() {
                s[k] = s[k + 1] * self.x_grids[k + 1].len();
            }
            s
        };
        let mut out = vec![0.0; dim];
        for (comp, out_k) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            // multilinear over 2^dim corners × 2 time levels
            for corner in 0..(1usize << dim) {
                let mut w = 1.0;
                let mut flat = 0usize;
                for k in 0..dim {
                    let (i, f) = brackets[k];
                    let up = (corner >> k) & 1 == 1;
                    let idx = if up { (i + 1).min(self.x_grids[k].len() - 1) } else { i };
                    w *= if up { f } else { 1.0 - f };
                    flat += idx * strides[k];
                }
                let lo = self.values[comp][it][flat];
                let hi = self.values[comp][(it + 1).min(self.t_grid.len() - 1)][flat];
                acc += w * (lo * (1.0 - ft) + hi * ft);
            }
            *out_k = acc;
        }
        Ok(out)
    }
}

/// Which representation a drift uses.
#[derive(Debug, Clone)]
enum DriftKind {
    Constant(Vec<f64>),
    ClosedForm(Vec<Expr>),
    Tabulated(DriftTable),
}

/// A drift field `b(t,x)` on a model domain.
#[derive(Debug, Clone)]
pub struct DriftField {
    kind: DriftKind,
    support: Domain,
}

impl DriftField {
    pub fn zero(domain: &Domain) -> Self {
        Self {
            kind: DriftKind::Constant(vec![0.0; domain.dim]),
            support: domain.clone(),
        }
    }

    pub fn constant(domain: &Domain, components: Vec<f64>) -> Result<Self> {
        if components.len() != domain.dim {
            return Err(Error::DimensionMismatch {
                expected: domain.dim,
                got: components.len(),
            });
        }
        Ok(Self {
            kind: DriftKind::Constant(components),
            support: domain.clone(),
        })
    }

    pub fn closed_form(domain: &Domain, components: &[&str]) -> Result<Self> {
        if components.len() != domain.dim {
            return Err(Error::DimensionMismatch {
                expected: domain.dim,
                got: components.len(),
            });
        }
        let exprs = components
            .iter()
            .map(|s| parse_expr(s, domain.dim))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind: DriftKind::ClosedForm(exprs),
            support: domain.clone(),
        })
    }

    pub fn tabulated(domain: &Domain, table: DriftTable) -> Result<Self> {
        if table.x_grids.len() != domain.dim {
            return Err(Error::DimensionMismatch {
                expected: domain.dim,
                got: table.x_grids.len(),
            });
        }
        Ok(Self {
            kind: DriftKind::Tabulated(table),
            support: domain.clone(),
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.support
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.kind, DriftKind::Constant(c) if c.iter().all(|&v| v == 0.0))
    }

    pub fn is_time_independent(&self) -> bool {
        match &self.kind {
            DriftKind::Constant(_) => true,
            DriftKind::ClosedForm(es) => es.iter().all(|e| !e.depends_on_t()),
            DriftKind::Tabulated(tab) => tab.t_grid.len() == 1,
        }
    }

    /// `b(t, x)` as a vector.
    pub fn eval(&self, t: f64, x: &Point) -> Result<Vec<f64>> {
        match &self.kind {
            DriftKind::Constant(c) => Ok(c.clone()),
            DriftKind::ClosedForm(es) => {
                let rho = self.support.rho_unchecked(x);
                Ok(es.iter().map(|e| e.eval(t, x, rho)).collect())
            }
            DriftKind::Tabulated(tab) => tab.eval(t, x),
        }
    }

    /// `|b(t,x)|`.
    pub fn magnitude(&self, t: f64, x: &Point) -> Result<f64> {
        Ok(self
            .eval(t, x)?
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt())
    }

    /// 1-d scalar component (hot path for the interval engine).
    pub fn scalar(&self, t: f64, x: f64) -> f64 {
        match &self.kind {
            DriftKind::Constant(c) => c[0],
            DriftKind::ClosedForm(es) => {
                let p = Point::scalar(x);
                let rho = self.support.rho_unchecked(&p);
                es[0].eval(t, &p, rho)
            }
            DriftKind::Tabulated(tab) => {
                tab.eval(t, &Point::scalar(x)).map(|v| v[0]).unwrap_or(0.0)
            }
        }
    }

    /// Pointwise scaling `c·b` (used by homogeneity checks).
    pub fn scaled(&self, c: f64) -> Self {
        match &self.kind {
            DriftKind::Constant(v) => Self {
                kind: DriftKind::Constant(v.iter().map(|a| c * a).collect()),
                support: self.support.clone(),
            },
            DriftKind::ClosedForm(es) => Self {
                kind: DriftKind::ClosedForm(
                    es.iter()
                        .map(|e| Expr::Mul(Box::new(Expr::Num(c)), Box::new(e.clone())))
                        .collect(),
                ),
                support: self.support.clone(),
            },
            DriftKind::Tabulated(tab) => {
                let mut t2 = tab.clone();
                for comp in &mut t2.values {
                    for lvl in comp {
                        for v in lvl {
                            *v *= c;
                        }
                    }
                }
                Self {
                    kind: DriftKind::Tabulated(t2),
                    support: self.support.clone(),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parses_grammar() {
        let d = Domain::unit_interval();
        let f = DriftField::closed_form(&d, &["rho(x)^-0.9"]).unwrap();
        let v = f.eval(0.0, &Point::scalar(0.1)).unwrap()[0];
        assert_abs_diff_eq!(v, 0.1_f64.powf(-0.9), epsilon = 1e-13);

        let f = DriftField::closed_form(&d, &["(1+t)*x - 0.5/|x|"]).unwrap();
        let v = f.eval(2.0, &Point::scalar(0.25)).unwrap()[0];
        assert_abs_diff_eq!(v, 3.0 * 0.25 - 0.5 / 0.25, epsilon = 1e-13);
        assert!(!f.is_time_independent());

        let b2 = Domain::ball(2, 1.0, vec![0.0, 0.0]).unwrap();
        let f = DriftField::closed_form(&b2, &["x2^2", "-x1"]).unwrap();
        let v = f.eval(0.0, &Point::new(vec![0.3, -0.4])).unwrap();
        assert_abs_diff_eq!(v[0], 0.16, epsilon = 1e-13);
        assert_abs_diff_eq!(v[1], -0.3, epsilon = 1e-13);
    }

    #[test]
    fn parse_errors_are_reported() {
        let d = Domain::unit_interval();
        assert!(DriftField::closed_form(&d, &["x1 +"]).is_err());
        assert!(DriftField::closed_form(&d, &["x2"]).is_err());
        assert!(DriftField::closed_form(&d, &["sin(x)"]).is_err());
        assert!(DriftField::closed_form(&d, &["1 2"]).is_err());
    }

    #[test]
    fn tabulated_round_trip_and_extrapolation() {
        let csv = "t,x1,b1\n0,0,1\n0,0.5,2\n0,1,3\n1,0,4\n1,0.5,5\n1,1,6\n";
        let tab = DriftTable::from_csv(csv, 1).unwrap();
        let d = Domain::unit_interval();
        let f = DriftField::tabulated(&d, tab).unwrap();
        assert_abs_diff_eq!(f.eval(0.0, &Point::scalar(0.5)).unwrap()[0], 2.0);
        assert_abs_diff_eq!(f.eval(0.5, &Point::scalar(0.25)).unwrap()[0], 3.0);
        assert!(matches!(
            f.eval(2.0, &Point::scalar(0.5)),
            Err(Error::DriftExtrapolation { .. })
        ));
        assert!(!f.is_time_independent());
    }

    #[test]
    fn csv_must_be_tensor_grid() {
        let csv = "t,x1,b1\n0,0,1\n0,0.5,2\n1,0,4\n";
        assert!(DriftTable::from_csv(csv, 1).is_err());
    }

    #[test]
    fn scaling_and_zero() {
        let d = Domain::unit_interval();
        let f = DriftField::constant(&d, vec![2.0]).unwrap();
        assert_abs_diff_eq!(f.scaled(3.0).scalar(0.0, 0.5), 6.0);
        assert!(DriftField::zero(&d).is_zero());
        assert!(!f.is_zero());
    }
}
