use crate::error::{Error, Result};
use crate::tensor::Tensor3;

fn check(z: &Tensor3, u: &Tensor3, v: &Tensor3) -> Result<()> {
    let [n1, n2, big] = z.dims();
    let [un, ur, ub] = u.dims();
    let [vn, vr, vb] = v.dims();
    if un != n1 || vn != n2 || ub != big || vb != big || ur != vr {
        return Err(Error::shape("project_s", &z.dims(), &[un, ur, ub, vn, vr, vb]));
    }
    Ok(())
}

/// Projection onto the span of the singular tensors `U`, `V`:
/// `U U^H Z + Z V V^H - U U^H Z V V^H`.
pub fn project_s(z: &Tensor3, u: &Tensor3, v: &Tensor3) -> Result<Tensor3> {
    check(z, u, v)?;
    let uh = u.t_conj_transpose();
    let vh = v.t_conj_transpose();
    let pu_z = u.t_product(&uh.t_product(z)?)?;
    let z_pv = z.t_product(v)?.t_product(&vh)?;
    let pu_z_pv = pu_z.t_product(v)?.t_product(&vh)?;
    Ok(&(&pu_z + &z_pv) - &pu_z_pv)
}

/// `(I - U U^H) Z (I - V V^H)`.
pub fn project_s_perp(z: &Tensor3, u: &Tensor3, v: &Tensor3) -> Result<Tensor3> {
    check(z, u, v)?;
    let uh = u.t_conj_transpose();
    let vh = v.t_conj_transpose();
    let left = z - &u.t_product(&uh.t_product(z)?)?;
    Ok(&left - &left.t_product(v)?.t_product(&vh)?)
}
