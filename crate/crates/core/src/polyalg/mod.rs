//! Exact polynomial algebra for the elimination pipeline: tan-half
//! rationalization, bivariate resultants, square-free factorization and
//! certified real-root isolation, plus a small floating-point root finder.

pub mod bivariate;
pub mod factor;
pub mod field;
pub mod modular;
pub mod numeric;
pub mod resultant;
pub mod roots;
pub mod trig;
pub mod univariate;

pub use bivariate::{BiPoly, BiPolyF64, Var};
pub use factor::{split_by_gcd, squarefree_factor, yun, FactorizationResult};
pub use field::{exact_sqrt, parse_decimal, ratio_to_f64, sqrt_ratio, Field, QuadNum};
pub use modular::{reconstruct_monic, ModContext, ModQuad, Reconstruction};
pub use resultant::{resultant, resultant_univariate, Elimination};
pub use roots::{real_roots, real_roots_squarefree, RealRoot, RootInterval, DEFAULT_DEGREE_CAP};
pub use trig::{tan_half_substitute, TanHalf, TrigPoly};
pub use univariate::{Poly, QuadPoly, RatPoly};
