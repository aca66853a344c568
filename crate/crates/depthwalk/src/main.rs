fn main() {
    std::process::exit(depthwalk::run_main());
}
