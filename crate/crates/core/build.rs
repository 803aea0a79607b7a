use std::process::Command;

fn main() {
    println!("cargo:rerun-if-env-changed=LOEWNER_LAB_GIT_DESCRIBE");
    println!("cargo:rerun-if-changed=../../.git/HEAD");
    println!("cargo:rerun-if-changed=../../.git/index");
    let describe = std::env::var("LOEWNER_LAB_GIT_DESCRIBE").ok().or_else(|| {
        let out = Command::new("git")
            .args(["describe", "--always", "--dirty", "--tags"])
            .output()
            .ok()?;
        out.status
            .success()
            .then(|| String::from_utf8_lossy(&out.stdout).trim().to_string())
            .filter(|s| !s.is_empty())
    });
    let describe = describe.unwrap_or_else(|| format!("v{}", std::env::var("CARGO_PKG_VERSION").unwrap()));
    println!("cargo:rustc-env=LOEWNER_LAB_GIT_DESCRIBE={describe}");
}
