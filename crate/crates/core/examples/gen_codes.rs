//! Regenerates the LDPC parity-check files in `codes/`.
//!
//! cargo run -p fhc --example gen_codes

use fhc::phy::ldpc::generate_qc_ira;
use fhc::phy::Nominal;
use std::path::Path;

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("codes");
    for n in Nominal::ALL {
        let h = generate_qc_ira(&n.generator_params());
        std::fs::write(dir.join(n.file_name()), h.to_alist())?;
        println!("{} {}x{} edges {}", n.file_name(), h.n_rows(), h.n_cols(), h.n_edges());
    }
    Ok(())
}
