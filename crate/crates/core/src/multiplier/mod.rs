//! Major-arc main terms, the error multiplier, and the kernel identity.

pub mod bump;
pub mod kernel;
pub mod main_term;
pub mod scan;

pub use bump::{psi, psi_d, PsiCheck};
pub use kernel::{kernel_identity_check, KernelCheck, KernelConfig};
pub use main_term::{dyadic_cutoff, isqrt, MainTerm, Normalization};
pub use scan::{error_multiplier_scan, ErrorMultiplier, ErrorScan, ErrorScanReport, ScanConfig};
