pub mod error;
pub mod estimation;
pub mod exec;
pub mod exponent;
pub mod interp;
pub mod io;
pub mod levy;
pub mod moments;
pub mod ou;
pub mod params;
pub mod quad;
pub mod special;
pub mod spectral;
pub mod validation;

#[cfg(test)]
mod test_oracle;
