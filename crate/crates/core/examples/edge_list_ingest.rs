use std::io::Cursor;
use std::path::Path;

use extmem::graph::{parse_edge_list, Directedness};

const EDGES: &str = "\
# tiny social graph
0 1
0 2
1 2
2 3

3 4
";

pub fn run_example() -> extmem::Result<()> {
    let g = parse_edge_list(
        Cursor::new(EDGES),
        Path::new("inline"),
        Directedness::Undirected,
        None,
    )?;
    println!(
        "{} vertices, {} directed edges",
        g.num_vertices(),
        g.num_edges()
    );
    for v in 0..g.num_vertices() {
        let sl = g.sublist(v)?;
        println!(
            "  {v}: neighbors {:?}, sublist at byte {} len {}",
            g.neighbors(v),
            sl.byte_offset,
            sl.byte_length
        );
    }

    // errors carry the line number
    let bad = parse_edge_list(
        Cursor::new("0 1\n1 x\n"),
        Path::new("bad.txt"),
        Directedness::Directed,
        None,
    );
    println!("bad input: {}", bad.unwrap_err());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
