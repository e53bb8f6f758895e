//! Constant-velocity Kalman filter over (cx, cy, vx, vy), one frame per
//! step. The update uses the Joseph form and re-symmetrizes the
//! covariance so it stays symmetric positive semi-definite.

use crate::num::Real;

type Mat4<R> = [[R; 4]; 4];

fn zeros<R: Real>() -> Mat4<R> {
    [[R::zero(); 4]; 4]
}

fn identity<R: Real>() -> Mat4<R> {
    let mut m = zeros();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = R::one();
    }
    m
}

fn mat_mul<R: Real>(a: &Mat4<R>, b: &Mat4<R>) -> Mat4<R> {
    let mut out = zeros();
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = R::zero();
            for (k, bk) in b.iter().enumerate() {
                acc = acc + a[i][k] * bk[j];
            }
            out[i][j] = acc;
        }
    }
    out
}

fn mat_add<R: Real>(a: &Mat4<R>, b: &Mat4<R>) -> Mat4<R> {
    let mut out = zeros();
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[i][j] + b[i][j];
        }
    }
    out
}

fn transpose<R: Real>(a: &Mat4<R>) -> Mat4<R> {
    let mut out = zeros();
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i];
        }
    }
    out
}

fn symmetrize<R: Real>(a: &mut Mat4<R>) {
    let half = R::of_f64(0.5);
    for i in 0..4 {
        for j in (i + 1)..4 {
            let v = (a[i][j] + a[j][i]) * half;
            a[i][j] = v;
            a[j][i] = v;
        }
    }
}

#[derive(Debug, Clone)]
pub struct KalmanFilter<R: Real> {
    x: [R; 4],
    p: Mat4<R>,
    process_noise_pos: R,
    process_noise_vel: R,
    measurement_noise: R,
}

impl<R: Real> KalmanFilter<R> {
    /// Start a track at a measured position with unknown velocity.
    pub fn new(
        cx: R,
        cy: R,
        process_noise_pos: R,
        process_noise_vel: R,
        measurement_noise: R,
        initial_velocity_variance: R,
    ) -> Self {
        let mut p = zeros();
        p[0][0] = measurement_noise;
        p[1][1] = measurement_noise;
        p[2][2] = initial_velocity_variance;
        p[3][3] = initial_velocity_variance;
        KalmanFilter {
            x: [cx, cy, R::zero(), R::zero()],
            p,
            process_noise_pos,
            process_noise_vel,
            measurement_noise,
        }
    }

    pub fn state(&self) -> (R, R, R, R) {
        (self.x[0], self.x[1], self.x[2], self.x[3])
    }

    pub fn position(&self) -> (R, R) {
        (self.x[0], self.x[1])
    }

    pub fn velocity(&self) -> (R, R) {
        (self.x[2], self.x[3])
    }

    pub fn covariance(&self) -> [[R; 4]; 4] {
        self.p
    }

    /// Advance one frame: position moves by the velocity, covariance by
    /// F P Fᵀ + Q.
    pub fn predict(&mut self) {
        let mut f = identity();
        f[0][2] = R::one();
        f[1][3] = R::one();
        self.x = [
            self.x[0] + self.x[2],
            self.x[1] + self.x[3],
            self.x[2],
            self.x[3],
        ];
        let mut q = zeros();
        q[0][0] = self.process_noise_pos;
        q[1][1] = self.process_noise_pos;
        q[2][2] = self.process_noise_vel;
        q[3][3] = self.process_noise_vel;
        self.p = mat_add(&mat_mul(&mat_mul(&f, &self.p), &transpose(&f)), &q);
        symmetrize(&mut self.p);
    }

    /// Fold in a measured center position.
    pub fn update(&mut self, zx: R, zy: R) {
        let p = &self.p;
        let r = self.measurement_noise;
        // S = H P Hᵀ + R I₂ with H selecting (cx, cy).
        let s00 = p[0][0] + r;
        let s01 = p[0][1];
        let s10 = p[1][0];
        let s11 = p[1][1] + r;
        let det = s00 * s11 - s01 * s10;
        let (i00, i01, i10, i11) = (s11 / det, -s01 / det, -s10 / det, s00 / det);
        // K = P Hᵀ S⁻¹ is 4x2.
        let mut k = [[R::zero(); 2]; 4];
        for (row, krow) in k.iter_mut().enumerate() {
            krow[0] = p[row][0] * i00 + p[row][1] * i10;
            krow[1] = p[row][0] * i01 + p[row][1] * i11;
        }
        let (yx, yy) = (zx - self.x[0], zy - self.x[1]);
        for (row, krow) in k.iter().enumerate() {
            self.x[row] = self.x[row] + krow[0] * yx + krow[1] * yy;
        }
        // Joseph form: P = (I-KH) P (I-KH)ᵀ + K R Kᵀ.
        let mut ikh = identity();
        for (row, krow) in k.iter().enumerate() {
            ikh[row][0] = ikh[row][0] - krow[0];
            ikh[row][1] = ikh[row][1] - krow[1];
        }
        let mut new_p = mat_mul(&mat_mul(&ikh, &self.p), &transpose(&ikh));
        for i in 0..4 {
            for j in 0..4 {
                new_p[i][j] = new_p[i][j] + k[i][0] * r * k[j][0] + k[i][1] * r * k[j][1];
            }
        }
        symmetrize(&mut new_p);
        self.p = new_p;
    }
}
