//! Linear and Gaussian kernels, Gram matrices, and the bias-augmented form.
//!
//! `cargo run --release --example kernels`

use dcsvm::kernelcore::{augmented_kernel, kernel_eval, kernel_matrix};
use dcsvm::KernelSpec;

fn main() -> dcsvm::Result<()> {
    let points = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0]];
    let linear = KernelSpec::Linear;
    let rbf = KernelSpec::gaussian(1.0)?;

    println!("k(x, z) for x = (1, 0), z = (0, 2):");
    println!("  linear   {}", kernel_eval(&linear, &points[1], &points[2])?);
    println!("  gaussian {:.6}  (exp(-5/2) = {:.6})", kernel_eval(&rbf, &points[1], &points[2])?, (-2.5f64).exp());

    let gram = kernel_matrix(&rbf, &points)?;
    println!("\nGaussian Gram matrix:\n{gram:.4}");
    // Adding 1 to every entry folds the bias into the kernel.
    println!("\naugmented (K + 1):\n{:.4}", augmented_kernel(&gram)?);
    Ok(())
}
