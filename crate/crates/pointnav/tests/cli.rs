use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use pointnav::client::{BridgeClient, Push};
use pointnav::schema::ChannelKey;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pointnav"));
    c.env("RUST_LOG", "info");
    c
}

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn text(out: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
}

fn free_addr() -> String {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().to_string()
}

struct Running(Child);

impl Drop for Running {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn start_bridge(addr: &str) -> Running {
    let child = bin()
        .args(["bridge", "--tcp", addr, "--no-ws"])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let running = Running(child);
    let deadline = Instant::now() + Duration::from_secs(10);
    while BridgeClient::connect(addr).is_err() {
        assert!(Instant::now() < deadline, "bridge did not come up");
        thread::sleep(Duration::from_millis(20));
    }
    running
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn bridge_health_and_reset() {
    let addr = free_addr();
    let _bridge = start_bridge(&addr);

    let health = bin().args(["health", "--bridge", &addr]).output().unwrap();
    assert!(health.status.success(), "{}", text(&health));
    assert!(text(&health).contains("ok"));

    let mut watcher = BridgeClient::connect(&addr).unwrap();
    watcher.subscribe(ChannelKey::BridgeReset).unwrap();
    let reset = bin().args(["reset", "--bridge", &addr]).output().unwrap();
    assert!(reset.status.success(), "{}", text(&reset));
    assert_eq!(watcher.next_push(Duration::from_secs(5)), Some(Push::Reset));
    assert!(matches!(
        watcher.next_push(Duration::from_secs(5)),
        Some(Push::Update { key: ChannelKey::BridgeReset, seq: 1, .. })
    ));
}

#[test]
fn second_bridge_on_the_same_port_exits_with_a_diagnostic() {
    let addr = free_addr();
    let _first = start_bridge(&addr);
    let second = bin().args(["bridge", "--tcp", &addr, "--no-ws"]).output().unwrap();
    assert!(!second.status.success());
    let msg = text(&second);
    assert!(msg.contains("cannot start bridge") && msg.contains(&addr), "{msg}");
}

#[test]
fn health_without_a_bridge_fails() {
    let out = bin().args(["health", "--bridge", &free_addr()]).output().unwrap();
    assert!(!out.status.success());
    assert!(text(&out).contains("no bridge"));
}

#[test]
fn robot_runs_against_a_bridge_process() {
    let addr = free_addr();
    let _bridge = start_bridge(&addr);
    let world = scenarios().join("corridor.world");
    let out = bin()
        .args(["robot", "--bridge", &addr, "--world"])
        .arg(&world)
        .args(["--ticks", "20", "--tick-rate", "2000"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", text(&out));
    let mut c = BridgeClient::connect(&addr).unwrap();
    assert!(c.get(ChannelKey::Map, None).unwrap().payload.is_some());
    assert_eq!(c.get(ChannelKey::Odom, None).unwrap().seq, Some(5));

    // a second robot process picks up the first one's state
    let again = bin()
        .args(["robot", "--bridge", &addr, "--world"])
        .arg(&world)
        .args(["--ticks", "1", "--tick-rate", "2000"])
        .output()
        .unwrap();
    assert!(text(&again).contains("resumed"), "{}", text(&again));
}

#[test]
fn robot_gives_up_on_an_unreachable_bridge() {
    let out = bin()
        .args(["robot", "--bridge", &free_addr(), "--connect-attempts", "2", "--connect-delay-ms", "10", "--world"])
        .arg(scenarios().join("corridor.world"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(text(&out).contains("unreachable after 2 attempts"), "{}", text(&out));
}

#[test]
fn bad_world_file_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let world = write(dir.path(), "bad.world", "start 0 0 0\nwall 0 0 1\n");
    let out = bin().args(["robot", "--world"]).arg(&world).output().unwrap();
    assert!(!out.status.success());
    assert!(text(&out).contains("line 2"), "{}", text(&out));
}

#[test]
fn bad_settings_are_refused() {
    let out = bin()
        .args(["scenario", "--dt", "0", "--world"])
        .arg(scenarios().join("corridor.world"))
        .arg("--script")
        .arg(scenarios().join("corridor.scn"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(text(&out).contains("invalid settings"), "{}", text(&out));
}

#[test]
fn scenario_exit_status_follows_the_script() {
    let dir = tempfile::tempdir().unwrap();
    let world = scenarios().join("corridor.world");
    let transcript = dir.path().join("run.log");
    let pass = bin()
        .args(["scenario", "--world"])
        .arg(&world)
        .arg("--script")
        .arg(scenarios().join("corridor.scn"))
        .arg("--transcript")
        .arg(&transcript)
        .output()
        .unwrap();
    assert!(pass.status.success(), "{}", text(&pass));
    assert!(text(&pass).contains("PASS"));
    let log = std::fs::read_to_string(&transcript).unwrap();
    assert!(log.lines().next().unwrap().starts_with("@0 "));
    assert!(log.contains("Kirby_Feedback"));

    let script = write(dir.path(), "wrong.scn", "timeout 50\n@1 utter \"go forward\"\nexpect \"canceled all goals\"\n");
    let fail = bin().args(["scenario", "--world"]).arg(&world).arg("--script").arg(&script).output().unwrap();
    assert_eq!(fail.status.code(), Some(1));
    assert!(text(&fail).contains("FAIL line 3"), "{}", text(&fail));
}
