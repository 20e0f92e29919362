fn main() {
    std::process::exit(becback::cli::run() as i32);
}
