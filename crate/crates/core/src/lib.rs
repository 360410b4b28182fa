mod dd;
pub mod quadrature;
pub mod scaled;
pub mod transforms;
pub mod series;
pub mod curve;
pub mod levy;
pub mod ode_oracle;
