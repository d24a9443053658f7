fn main() {
    std::process::exit(skewmat::cli::main() as i32);
}
