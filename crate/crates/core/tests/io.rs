use std::fs;

use proptest::prelude::*;
use tnn_core::generators::bernoulli_mask;
use tnn_core::io::{
    read_mask, read_matrix, read_tensor, read_transform, write_mask, write_matrix, write_tensor, write_transform,
};
use tnn_core::solver::SamplingMask;
use tnn_core::{c64, Error, LinearTransform, Tensor3};

fn bits(t: &Tensor3) -> Vec<(u64, u64)> {
    t.data().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect()
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = Tensor3::from_fn([4, 3, 2], |i, j, k| c64::new(i as f64 * 1e-300, -(j as f64) / 7.0 + k as f64)).unwrap();
    let path = dir.path().join("a.tns");
    write_tensor(&path, &t).unwrap();
    let back = read_tensor(&path).unwrap();
    assert_eq!(bits(&back), bits(&t));
    assert_eq!(back.dims(), t.dims());

    let real = Tensor3::from_real([2, 2, 2], (0..8).map(|v| v as f64 - 3.5).collect())
        .unwrap()
        .with_real_hint(true)
        .unwrap();
    write_tensor(&path, &real).unwrap();
    assert_eq!(fs::metadata(&path).unwrap().len(), 29 + 8 * 8);
    let back = read_tensor(&path).unwrap();
    assert!(back.real_hint());
    assert_eq!(bits(&back), bits(&real));

    let mask = bernoulli_mask([5, 4, 3], 0.4, 2).unwrap();
    let mpath = dir.path().join("m.msk");
    write_mask(&mpath, &mask).unwrap();
    assert_eq!(read_mask(&mpath).unwrap(), mask);
    assert_eq!(fs::metadata(&mpath).unwrap().len(), 36 + 24 * mask.len() as u64);

    let tr = LinearTransform::random_conditioned(4, 6, 1, 0.5, 2.0).unwrap();
    let tpath = dir.path().join("mine.tns");
    write_transform(&tpath, &tr).unwrap();
    let back = read_transform(&tpath).unwrap();
    assert_eq!(back.name(), "mine");
    assert_eq!(back.matrix(), tr.matrix());
    assert_eq!(read_matrix(&tpath).unwrap(), tr.matrix().to_owned());
    write_matrix(&tpath, tr.pinv()).unwrap();
    assert!(read_transform(&tpath).is_err());
}

#[test]
fn missing_and_malformed_files() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(read_tensor(dir.path().join("none.tns")), Err(Error::Io { .. })));

    let path = dir.path().join("bad.tns");
    let t = Tensor3::zeros([2, 2, 2]).unwrap();
    write_tensor(&path, &t).unwrap();
    let mut bytes = fs::read(&path).unwrap();
    bytes.truncate(bytes.len() - 3);
    fs::write(&path, &bytes).unwrap();
    match read_tensor(&path) {
        Err(Error::Truncated { expected, actual, .. }) => assert_eq!((expected, actual), (93, 90)),
        other => panic!("{other:?}"),
    }
    bytes[0] = b'X';
    fs::write(&path, &bytes).unwrap();
    assert!(matches!(read_tensor(&path), Err(Error::Format { offset: 0, .. })));

    let mpath = dir.path().join("bad.msk");
    let mask = SamplingMask::from_indices([3, 3, 3], vec![[0, 0, 1], [2, 1, 0]]).unwrap();
    write_mask(&mpath, &mask).unwrap();
    let mut mb = fs::read(&mpath).unwrap();
    // Swap the two triples so they are out of order.
    let (a, b) = (mb[36..60].to_vec(), mb[60..84].to_vec());
    mb[36..60].copy_from_slice(&b);
    mb[60..84].copy_from_slice(&a);
    fs::write(&mpath, &mb).unwrap();
    assert!(matches!(read_mask(&mpath), Err(Error::Format { offset: 60, .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn arbitrary_tensors_round_trip(
        n1 in 1usize..5, n2 in 1usize..5, n3 in 1usize..4,
        raw in prop::collection::vec((any::<f64>(), any::<f64>()), 64),
        real in any::<bool>(),
    ) {
        let finite = |v: f64| if v.is_finite() { v } else { 0.5 };
        let t = Tensor3::from_fn([n1, n2, n3], |i, j, k| {
            let (re, im) = raw[(i + n1 * (j + n2 * k)) % raw.len()];
            c64::new(finite(re), if real { 0.0 } else { finite(im) })
        }).unwrap();
        let back = tnn_core::io::decode_tensor(std::path::Path::new("p"), &tnn_core::io::encode_tensor(&t)).unwrap();
        prop_assert_eq!(bits(&back), bits(&t));
    }

    #[test]
    fn arbitrary_masks_round_trip(seed in any::<u64>(), p in 0.05f64..1.0) {
        let mask = bernoulli_mask([4, 3, 5], p, seed).unwrap();
        let bytes = tnn_core::io::encode_mask(&mask);
        let back = tnn_core::io::decode_mask(std::path::Path::new("p"), &bytes).unwrap();
        prop_assert_eq!(back, mask);
    }
}
