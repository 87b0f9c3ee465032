use matlin::{spectral_abscissa, Mat};

use crate::{Error, Result};

/// State-space data for one design problem:
///
/// ```text
///   ẋ = A x + B₁ w + B u
///   z = C₁ x + D₁₁ w + D₁₂ u
///   y = C x + D₂₁ w
/// ```
///
/// A static gain u = F·y closes the loop to ẋ = A_F x + B_F w,
/// z = C_F x + D_F w with A_F = A + B·F·C and C_F = C₁ + D₁₂·F·C.
#[derive(Debug, Clone)]
pub struct Plant {
    pub name: String,
    pub a: Mat,
    pub b: Mat,
    pub b1: Mat,
    pub c: Mat,
    pub c1: Mat,
    pub d11: Mat,
    pub d12: Mat,
    pub d21: Mat,
}

impl Plant {
    /// Builds a plant and checks that all eight matrices agree on the five
    /// dimensions (n, n_u, n_w, n_y, n_z).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        a: Mat,
        b: Mat,
        b1: Mat,
        c: Mat,
        c1: Mat,
        d11: Mat,
        d12: Mat,
        d21: Mat,
    ) -> Result<Self> {
        let plant = Plant { name: name.into(), a, b, b1, c, c1, d11, d12, d21 };
        plant.check_dims()?;
        Ok(plant)
    }

    fn check_dims(&self) -> Result<()> {
        let n = self.a.rows();
        if !self.a.is_square() {
            return Err(Error::Dimension(format!(
                "state matrix must be square, got {}x{}",
                self.a.rows(),
                self.a.cols()
            )));
        }
        let checks = [
            ("B", self.b.rows(), n),
            ("B1", self.b1.rows(), n),
            ("C", self.c.cols(), n),
            ("C1", self.c1.cols(), n),
            ("D11 rows", self.d11.rows(), self.nz()),
            ("D11 cols", self.d11.cols(), self.nw()),
            ("D12 rows", self.d12.rows(), self.nz()),
            ("D12 cols", self.d12.cols(), self.nu()),
            ("D21 rows", self.d21.rows(), self.ny()),
            ("D21 cols", self.d21.cols(), self.nw()),
        ];
        for (what, got, want) in checks {
            if got != want {
                return Err(Error::Dimension(format!(
                    "plant {}: {what} is {got}, expected {want}",
                    self.name
                )));
            }
        }
        if n == 0 || self.nu() == 0 || self.ny() == 0 || self.nw() == 0 || self.nz() == 0 {
            return Err(Error::Dimension(format!(
                "plant {}: every channel needs at least one signal",
                self.name
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn nu(&self) -> usize {
        self.b.cols()
    }

    pub fn nw(&self) -> usize {
        self.b1.cols()
    }

    pub fn ny(&self) -> usize {
        self.c.rows()
    }

    pub fn nz(&self) -> usize {
        self.c1.rows()
    }

    /// Checks that a gain has the closing shape n_u×n_y.
    pub fn check_gain(&self, f: &Mat) -> Result<()> {
        if f.rows() != self.nu() || f.cols() != self.ny() {
            return Err(Error::Dimension(format!(
                "gain is {}x{}, plant {} closes with {}x{}",
                f.rows(),
                f.cols(),
                self.name,
                self.nu(),
                self.ny()
            )));
        }
        Ok(())
    }

    /// Closed-loop state matrix A + B·F·C.
    pub fn a_closed(&self, f: &Mat) -> Mat {
        self.a.add(&self.b.matmul(f).matmul(&self.c))
    }

    /// Closed-loop regulated output matrix C₁ + D₁₂·F·C.
    pub fn c_closed(&self, f: &Mat) -> Mat {
        self.c1.add(&self.d12.matmul(f).matmul(&self.c))
    }

    /// Spectral abscissa of the open loop.
    pub fn open_loop_abscissa(&self) -> Result<f64> {
        Ok(spectral_abscissa(&self.a)?)
    }

    pub fn is_zero(m: &Mat) -> bool {
        m.norm_max() == 0.0
    }
}
