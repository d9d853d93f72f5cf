fn main() {
    std::process::exit(kljn_lab_harness::cli_main(std::env::args_os()));
}
