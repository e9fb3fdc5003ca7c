//! First-order forward-mode values used to differentiate the prime basis
//! recurrences.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 3],
}

impl Jet {
    pub fn constant(value: f64) -> Self {
        Jet {
            value,
            grad: [0.0; 3],
        }
    }

    /// The coordinate `X_axis` scaled as `scale * X + shift`.
    pub fn variable(x: f64, axis: usize, scale: f64, shift: f64) -> Self {
        let mut grad = [0.0; 3];
        grad[axis] = scale;
        Jet {
            value: scale * x + shift,
            grad,
        }
    }

    pub fn scale(self, s: f64) -> Self {
        Jet {
            value: self.value * s,
            grad: [self.grad[0] * s, self.grad[1] * s, self.grad[2] * s],
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            value: self.value + o.value,
            grad: [self.grad[0] + o.grad[0], self.grad[1] + o.grad[1], self.grad[2] + o.grad[2]],
        }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, c: f64) -> Jet {
        self.value += c;
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + o.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut grad = [0.0; 3];
        for (k, g) in grad.iter_mut().enumerate() {
            *g = self.grad[k] * o.value + self.value * o.grad[k];
        }
        Jet {
            value: self.value * o.value,
            grad,
        }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale(s)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        j.scale(self)
    }
}
