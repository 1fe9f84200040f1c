//! Drive the command-line runner from code with a config file. Flags given
//! on the command line override the file.

pub fn run_example() -> extmem::Result<()> {
    let dir = tempfile::tempdir()?;
    let config = dir.path().join("experiment.ini");
    std::fs::write(
        &config,
        "[general]\n\
         graph = urand:12:16\n\
         seed = 3\n\
         \n\
         [raf]\n\
         alignments = 32, 512, 4KiB\n\
         cache = 1/16\n",
    )?;
    let out = dir.path().join("out");
    let code = extmem::cli::run([
        "extmem".as_ref(),
        "--config".as_ref(),
        config.as_os_str(),
        "--out".as_ref(),
        out.as_os_str(),
        "--no-timestamp".as_ref(),
        "raf".as_ref(),
        "--alignments".as_ref(),
        "32,128,4096".as_ref(),
    ] as [&std::ffi::OsStr; 9]);
    assert_eq!(code, 0);
    print!("{}", std::fs::read_to_string(out.join("raf.csv"))?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
