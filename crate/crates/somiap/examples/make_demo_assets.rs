//! Writes a tiny demo data set (two people, one composite query scene) into
//! the directory given as the first argument.

use somiap::decode::{encode_pgm, encode_ppm};
use somiap::synth;
use somiap_core::Rect;
use std::fs;
use std::path::Path;

fn main() {
    let out = std::env::args().nth(1).expect("usage: make_demo_assets <dir>");
    let out = Path::new(&out);
    for (person, label) in ["ann", "bob"].iter().enumerate() {
        let dir = out.join("faces").join(label);
        fs::create_dir_all(&dir).unwrap();
        for v in 0..4u64 {
            let img = synth::portrait(person, v + 1, 128, 128, Rect::new(40, 36, 48, 48));
            fs::write(dir.join(format!("{v}.pgm")), encode_pgm(&img)).unwrap();
        }
    }
    let query = synth::scene_with_face(42, 1, 9, Rect::new(72, 40, 48, 48));
    fs::write(out.join("query.ppm"), encode_ppm(&query)).unwrap();
    fs::write(
        out.join("other.ppm"),
        encode_ppm(&synth::scene(77, 128, 96)),
    )
    .unwrap();
    println!("wrote demo assets under {}", out.display());
}
