use std::fs;

use netlasso::generator::{generate_planted_partition, PlantedPartitionConfig};
use netlasso::graph::clustered_signal;
use netlasso::io::{
    read_graph, read_node_set, read_partition, read_signal, write_graph, write_node_set,
    write_partition, write_signal, FormatError,
};

#[test]
fn generated_instance_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let (g, f) = generate_planted_partition(&PlantedPartitionConfig::paper_like(4)).unwrap();
    let x = clustered_signal(&f, &[0.1, -2.5, 3.0, 1e-7]).unwrap();
    let m = vec![0, 5, 17, 29];
    fs::write(dir.path().join("g.txt"), write_graph(&g)).unwrap();
    fs::write(dir.path().join("f.txt"), write_partition(&f)).unwrap();
    fs::write(dir.path().join("x.txt"), write_signal(&x)).unwrap();
    fs::write(dir.path().join("m.txt"), write_node_set(&m)).unwrap();

    let g2 = read_graph(&dir.path().join("g.txt")).unwrap();
    assert_eq!(g2, g);
    assert_eq!(read_partition(&dir.path().join("f.txt"), 30).unwrap(), f);
    assert_eq!(read_signal(&dir.path().join("x.txt"), 30).unwrap(), x);
    assert_eq!(read_node_set(&dir.path().join("m.txt"), 30).unwrap(), m);
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(read_graph(&dir.path().join("absent")), Err(FormatError::Io(_))));
}
