// One PASS/FAIL line per acceptance criterion. Exit status is non-zero when
// any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "gen.hpp"
#include "holo/analytics/coding.hpp"
#include "holo/analytics/dataset.hpp"
#include "holo/analytics/report.hpp"
#include "holo/analytics/acoustic.hpp"
#include "holo/analytics/stats.hpp"
#include "holo/config.hpp"
#include "holo/geometry.hpp"
#include "holo/protocol.hpp"
#include "holo/simulate.hpp"
#include "holo/techniques.hpp"
#include "holo/tracking.hpp"
#include "oracles.hpp"

namespace an = holo::analytics;
namespace fs = std::filesystem;
using holo::geom::Vec3;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& why) {
        if (!ok && pass) detail << "first failure: " << why << "; ";
        pass = pass && ok;
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---------------------------------------------------------------------------

void knowledge_test(Outcome& o) {
    const auto t0 = Clock::now();
    an::AnswerKey key;
    key.single = {"a", "b", "c", "d"};
    key.multiple = {std::set<std::string>{"a", "c"}, std::set<std::string>{"b", "d"}};
    an::KnowledgeTestResponse best;
    best.single = key.single;
    best.multiple = key.multiple;
    best.open.fill(an::kOpenMax);
    const int max = an::score_test(best, key);
    o.require(max == 38, "maximum is " + std::to_string(max));
    o.require(4 * 1 + 2 * 2 + 6 * 5 == 38, "rubric arithmetic");

    const std::vector<std::string> letters{"a", "b", "c", "d", "x"};
    std::vector<std::set<std::string>> subsets;
    for (int mask = 0; mask < 16; ++mask) {
        std::set<std::string> s;
        for (int i = 0; i < 4; ++i) {
            if (mask & (1 << i)) s.insert(letters[i]);
        }
        subsets.push_back(s);
    }
    gen::Rng rng(685);
    std::size_t perturbations = 0;
    for (int n = 0; n < 50; ++n) {
        an::KnowledgeTestResponse r;
        for (auto& s : r.single) s = letters[gen::integer(rng, 0, 4)];
        for (auto& m : r.multiple) m = subsets[gen::integer(rng, 0, 15)];
        for (auto& v : r.open) v = static_cast<int>(gen::integer(rng, 0, an::kOpenMax));
        const int base = an::score_test(r, key);
        o.require(base >= 0 && base <= 38, "score out of range");
        // Every alternative answer to every single item: the score moves by
        // exactly the item's own change in points.
        for (std::size_t i = 0; i < an::kSingleItems; ++i) {
            const int before = r.single[i] == key.single[i];
            for (const auto& alt : letters) {
                an::KnowledgeTestResponse p = r;
                p.single[i] = alt;
                const int after = alt == key.single[i];
                o.require(an::score_test(p, key) - base == after - before, "single-choice perturbation");
                ++perturbations;
            }
        }
        for (std::size_t i = 0; i < an::kMultipleItems; ++i) {
            const int before = r.multiple[i] == key.multiple[i] ? 2 : 0;
            for (const auto& alt : subsets) {
                an::KnowledgeTestResponse p = r;
                p.multiple[i] = alt;
                const int after = alt == key.multiple[i] ? 2 : 0;
                o.require(an::score_test(p, key) - base == after - before, "multiple-choice perturbation");
                ++perturbations;
            }
        }
        for (std::size_t i = 0; i < an::kOpenItems; ++i) {
            for (int alt = 0; alt <= an::kOpenMax; ++alt) {
                an::KnowledgeTestResponse p = r;
                p.open[i] = alt;
                o.require(an::score_test(p, key) - base == alt - r.open[i], "open-item perturbation");
                ++perturbations;
            }
        }
    }
    const double secs = seconds_since(t0);
    o.require(secs < 1.0, "took " + std::to_string(secs) + " s");
    o.detail << "max=" << max << " perturbations=" << perturbations << " time=" << secs << "s";
}

// ---------------------------------------------------------------------------

void mann_whitney(Outcome& o) {
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::size_t exhaustive = 0;
    // Tie-free samples are characterised by which ranks fall in group a, so
    // every rank assignment covers every tie-free integer sample.
    for (std::size_t n1 = 1; n1 <= 4; ++n1) {
        for (std::size_t n2 = 1; n2 <= 4; ++n2) {
            std::vector<int> pick(n1 + n2, 0);
            std::fill(pick.end() - static_cast<long>(n1), pick.end(), 1);
            do {
                std::vector<double> a, b;
                for (std::size_t i = 0; i < pick.size(); ++i) (pick[i] ? a : b).push_back(static_cast<double>(i + 1));
                const an::StatResult r = an::mann_whitney_u(a, b);
                worst = std::max(worst, std::abs(r.p_value - oracle::mw_exact_p(a, b)));
                o.require(r.exact, "exhaustive case not exact");
                o.require(r.statistic == oracle::u_pairs(a, b), "U differs from pair count");
                ++exhaustive;
            } while (std::next_permutation(pick.begin(), pick.end()));
        }
    }
    gen::Rng rng(686);
    for (int i = 0; i < 1000; ++i) {
        const auto n1 = static_cast<std::size_t>(gen::integer(rng, 1, 11));
        const auto n2 = static_cast<std::size_t>(gen::integer(rng, 1, static_cast<std::int64_t>(12 - n1)));
        std::vector<int> pool(200);
        std::iota(pool.begin(), pool.end(), -100);
        std::shuffle(pool.begin(), pool.end(), rng);
        const std::vector<double> a(pool.begin(), pool.begin() + static_cast<long>(n1));
        const std::vector<double> b(pool.begin() + static_cast<long>(n1), pool.begin() + static_cast<long>(n1 + n2));
        const an::StatResult r = an::mann_whitney_u(a, b);
        worst = std::max(worst, std::abs(r.p_value - oracle::mw_exact_p(a, b)));
    }
    o.require(worst <= 1e-12, "p differs from enumeration by " + std::to_string(worst));

    for (int i = 0; i < 10'000; ++i) {
        std::vector<double> a(static_cast<std::size_t>(gen::integer(rng, 1, 30)));
        std::vector<double> b(static_cast<std::size_t>(gen::integer(rng, 1, 30)));
        for (auto& v : a) v = static_cast<double>(gen::integer(rng, 0, 20));
        for (auto& v : b) v = static_cast<double>(gen::integer(rng, 0, 20));
        const double ua = an::mann_whitney_u(a, b).statistic;
        const double ub = an::mann_whitney_u(b, a).statistic;
        o.require(ua + ub == static_cast<double>(a.size() * b.size()), "U_a + U_b != n1 n2");
    }
    const double secs = seconds_since(t0);
    o.require(secs < 10.0, "took " + std::to_string(secs) + " s");
    o.detail << "exhaustive=" << exhaustive << " random=1000 max|dp|=" << worst << " complement=10000 time=" << secs
             << "s";
}

// ---------------------------------------------------------------------------

void kappa(Outcome& o) {
    gen::Rng rng(687);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto k = static_cast<std::size_t>(gen::integer(rng, 2, 6));
        std::vector<std::vector<std::int64_t>> m(k, std::vector<std::int64_t>(k));
        for (auto& row : m) {
            for (auto& v : row) v = gen::integer(rng, 0, 50);
        }
        m[0][k - 1] += 1;  // at least two categories in use, so p_e < 1
        worst = std::max(worst, std::abs(an::cohen_kappa(m).statistic - oracle::kappa(m)));
    }
    o.require(worst <= 1e-12, "kappa off by " + std::to_string(worst));
    for (int i = 0; i < 200; ++i) {
        const auto k = static_cast<std::size_t>(gen::integer(rng, 1, 6));
        std::vector<std::vector<std::int64_t>> m(k, std::vector<std::int64_t>(k, 0));
        for (std::size_t j = 0; j < k; ++j) m[j][j] = gen::integer(rng, 0, 50);
        m[0][0] += 1;
        o.require(an::cohen_kappa(m).statistic == 1.0, "diagonal matrix did not give exactly 1");
    }
    o.detail << "random=1000 max|dk|=" << worst << " diagonal=200";
}

// ---------------------------------------------------------------------------

void acoustic(Outcome& o) {
    const double fs = 44'100.0;
    const std::size_t frame = 2205, hop = 1102;  // 50 ms / 25 ms
    double worst_zcr = 0.0;
    for (double f : {110.0, 440.0, 1760.0}) {
        std::vector<double> s(44'100);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(2.0 * M_PI * f * static_cast<double>(i) / fs + 0.1);
        for (const auto& fr : an::zero_crossing_rate(s, frame, hop, fs)) {
            worst_zcr = std::max(worst_zcr, std::abs(fr.zcr - oracle::sine_zcr(f, fs)));
        }
    }
    o.require(worst_zcr <= 5e-4, "ZCR off by " + std::to_string(worst_zcr));
    // 100 Hz at 44.1 kHz: 441 samples per period, 5 whole periods per frame.
    std::vector<double> s(44'100);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(2.0 * M_PI * 100.0 * static_cast<double>(i) / fs);
    double worst_e = 0.0;
    for (const auto& fr : an::short_time_energy(s, 2205, 441, fs)) worst_e = std::max(worst_e, std::abs(fr.energy - 0.5));
    o.require(worst_e <= 1e-6, "energy off by " + std::to_string(worst_e));
    o.detail << "max|dzcr|=" << worst_zcr << " max|denergy|=" << worst_e;
}

// ---------------------------------------------------------------------------

void projection(Outcome& o) {
    using namespace holo::geom;
    gen::Rng rng(689);
    const ScreenGeometry screen;
    double worst_line = 0.0, worst_plane = 0.0;
    std::size_t mirror_bad = 0, degenerate = 0, checked = 0;
    for (int i = 0; checked < 100'000; ++i) {
        const double side = i % 2 ? 1.0 : -1.0;
        const Vec3 eye{gen::real(rng, -3, 3), gen::real(rng, 0, 3), side * gen::real(rng, 0.3, 8)};
        Vec3 p{gen::real(rng, -3, 3), gen::real(rng, -1, 3), gen::real(rng, -4, 4)};
        if (i % 1000 == 0) p.z = eye.z + gen::real(rng, -kDegenerateEpsilon, kDegenerateEpsilon);
        const Viewer v = Viewer::at(eye);
        if (std::abs(eye.z - p.z) <= kDegenerateEpsilon) {
            try {
                (void)intersect_plane(v, p, screen);
                o.require(false, "degenerate pair accepted");
            } catch (const holo::Error& e) {
                o.require(std::string(e.kind()) == "DegenerateProjection", "wrong error kind " + e.kind());
                ++degenerate;
            }
            continue;
        }
        const PlaneHit h = intersect_plane(v, p, screen);
        o.require(std::isfinite(h.point.u) && std::isfinite(h.point.v), "non-finite projection");
        const Vec3 q{h.point.u, h.point.v, 0.0};
        const Vec3 d = p - eye;
        worst_line = std::max(worst_line, norm(cross(d, q - eye)) / norm(d));
        worst_plane = std::max(worst_plane, std::abs(eye.z + h.t * d.z));
        const ScreenPoint sp = h.point;
        const ScreenPoint back = mirror_u(mirror_u(sp));
        if (std::memcmp(&back.u, &sp.u, sizeof(double)) != 0 || std::memcmp(&back.v, &sp.v, sizeof(double)) != 0) {
            ++mirror_bad;
        }
        ++checked;
    }
    // Non-finite inputs are rejected rather than producing NaN.
    for (const Vec3& bad : {Vec3{NAN, 0, -1}, Vec3{0, INFINITY, -1}, Vec3{0, 0, NAN}}) {
        try {
            const PlaneHit h = intersect_plane(Viewer::at({0, 1.2, 5}), bad, screen);
            o.require(std::isfinite(h.point.u) && std::isfinite(h.point.v), "NaN produced");
        } catch (const holo::Error&) {
            ++degenerate;
        }
    }
    o.require(worst_line <= 1e-9, "off the eye ray by " + std::to_string(worst_line));
    o.require(worst_plane <= 1e-9, "off the plane by " + std::to_string(worst_plane));
    o.require(mirror_bad == 0, "double mirror changed bits");
    o.require(degenerate > 0, "no degenerate pairs exercised");
    o.detail << "pairs=" << checked << " max_ray_dist=" << worst_line << "m max_plane_dist=" << worst_plane
             << "m degenerate_rejected=" << degenerate;
}

// ---------------------------------------------------------------------------

void ballistics(Outcome& o) {
    using namespace holo::tech;
    PhysicsConfig cfg;
    cfg.dt = 1.0 / 1000.0;
    // Ball hits the board at 3 m/s, 45 degrees up from the horizontal.
    const double c = 3.0 / std::sqrt(2.0);
    const Contact contact{holo::geom::make_screen_point(0.3, 1.2, {}), {0.0, c, -c}, 0, holo::geom::Side::front};
    VirtualBall ball = handoff_physical_to_virtual(contact, cfg);
    const oracle::P3 p0{ball.position.x, ball.position.y, ball.position.z};
    const oracle::P3 v0{ball.velocity.x, ball.velocity.y, ball.velocity.z};
    double worst = 0.0;
    for (int k = 1; k <= 1000; ++k) {
        ball = step_ballistic(ball, cfg);
        o.require(ball.state == BallState::in_play, "ball left play at step " + std::to_string(k));
        const auto e = oracle::parabola(p0, v0, -cfg.gravity.y, k * cfg.dt);
        worst = std::max(worst, holo::geom::norm(ball.position - Vec3{e.x, e.y, e.z}));
    }
    o.require(worst <= 5e-3, "deviation " + std::to_string(worst) + " m");

    auto energy = [&](const VirtualBall& b) {
        return 0.5 * holo::geom::dot(b.velocity, b.velocity) - holo::geom::dot(cfg.gravity, b.position);
    };
    gen::Rng rng(690);
    int hits = 0, gained = 0;
    while (hits < 10'000) {
        const Vec3 p{gen::real(rng, -1.5, 1.5), gen::real(rng, 0, 2), gen::real(rng, -3, -0.2)};
        const VirtualBall b{p, {gen::real(rng, -4, 4), gen::real(rng, -4, 4), gen::real(rng, -4, 4)}};
        Pose hand;
        hand.device_id = "hand";
        hand.role = holo::tracking::Role::right_hand;
        hand.position = p + Vec3{gen::real(rng, -0.12, 0.12), gen::real(rng, -0.12, 0.12), gen::real(rng, -0.12, 0.12)};
        Paddle paddle{hand, 0.15, {gen::real(rng, -1, 1), gen::real(rng, -1, 1), gen::real(rng, -1, 1)}};
        if (auto out = paddle_hit(b, paddle, cfg)) {
            ++hits;
            if (energy(*out) > energy(b) * (1.0 + 1e-12) + 1e-12) ++gained;
        }
    }
    o.require(gained == 0, std::to_string(gained) + " hits added energy");
    o.detail << "max_dev=" << worst << "m paddle_hits=" << hits << " energy_gains=" << gained;
}

// ---------------------------------------------------------------------------

void inverse_kinematics(Outcome& o) {
    using namespace holo::geom;
    const holo::tracking::SkeletonConfig sk;
    gen::Rng rng(691);
    double worst_len = 0.0, worst_angle = 0.0;
    for (int i = 0; i < 10'000; ++i) {
        const bool arm = i % 2 == 0;
        const double upper = arm ? sk.upper_arm : sk.thigh;
        const double lower = arm ? sk.forearm : sk.shin;
        const Vec3 root{gen::real(rng, -1, 1), gen::real(rng, 0, 2), gen::real(rng, -2, 0)};
        Vec3 dir{gen::real(rng, -1, 1), gen::real(rng, -1, 1), gen::real(rng, -1, 1)};
        if (norm(dir) < 1e-3) {
            --i;
            continue;
        }
        dir = *normalized(dir);
        const double reach = gen::real(rng, std::abs(upper - lower) + 1e-3, upper + lower - 1e-3);
        const Vec3 target = root + dir * reach;
        const Vec3 pole = arm ? Vec3{0, 0, -1} : Vec3{0, 0, 1};
        const auto s = holo::tracking::solve_two_bone(root, target, upper, lower, pole);
        o.require(!s.clamped, "reachable target clamped");
        worst_len = std::max({worst_len, std::abs(distance(root, s.middle) - upper),
                              std::abs(distance(s.middle, s.effector) - lower)});
        // Angle at the middle joint, via atan2 to stay well conditioned near 0 and pi.
        const Vec3 a = root - s.middle, b = s.effector - s.middle;
        const double angle = std::atan2(norm(cross(a, b)), dot(a, b));
        worst_angle = std::max(worst_angle, std::abs(angle - oracle::law_of_cosines(upper, lower, reach)));
    }
    o.require(worst_len <= 1e-6, "bone length off by " + std::to_string(worst_len));
    o.require(worst_angle <= 1e-9, "joint angle off by " + std::to_string(worst_angle));
    o.detail << "targets=10000 max|dlen|=" << worst_len << "m max|dangle|=" << worst_angle << "rad";
}

// ---------------------------------------------------------------------------

int run_cli(const std::string& args) {
    const int status = std::system((std::string(HOLO_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

void replay(Outcome& o) {
    const fs::path src = HOLO_SOURCE_DIR;
    const fs::path work = fs::temp_directory_path() / "holo_acceptance_replay";
    fs::remove_all(work);
    const holo::EngineConfig cfg = holo::load_config(src / "config/default.json");
    for (const char* name : {"presentation", "role_play_afterimage", "ball_handoff"}) {
        const fs::path script_path = src / "scenarios" / (std::string(name) + ".jsonl");
        const auto t0 = Clock::now();
        const holo::ScenarioScript script = holo::load_script(script_path);
        const auto r1 = holo::run_simulation(cfg, script);
        const auto r2 = holo::run_simulation(cfg, script);
        const double in_process = seconds_since(t0) / 2.0;
        bool same = r1.digests.size() == r2.digests.size() && r1.event_lines == r2.event_lines;
        for (std::size_t i = 0; same && i < r1.digests.size(); ++i) {
            same = r1.digests[i].front == r2.digests[i].front && r1.digests[i].back == r2.digests[i].back;
        }
        o.require(same, std::string(name) + ": in-process runs differ");

        std::string files[2];
        double slowest = 0.0;
        for (int k = 0; k < 2; ++k) {
            const fs::path out = work / (std::string(name) + "_" + std::to_string(k));
            const auto t1 = Clock::now();
            const int code = run_cli("simulate --script " + script_path.string() + " --config " +
                                     (src / "config/default.json").string() + " --out " + out.string());
            slowest = std::max(slowest, seconds_since(t1));
            o.require(code == 0, std::string(name) + ": simulate exited " + std::to_string(code));
            files[k] = slurp(out / "digests.txt");
        }
        o.require(!files[0].empty() && files[0] == files[1], std::string(name) + ": digest files differ across processes");
        o.require(slowest < 5.0 && in_process < 5.0, std::string(name) + ": too slow");
        o.detail << name << "{frames=" << r1.digests.size() << " run=" << slowest << "s} ";
    }
    fs::remove_all(work);
}

// ---------------------------------------------------------------------------

void report(Outcome& o) {
    an::GeneratorOptions opt;
    opt.students_per_group = 18;
    const an::Report injected = an::build_report(an::generate_dataset(opt));
    const std::set<std::string> expected{"close_posture", "loudness"};
    std::set<std::string> significant;
    for (const auto& row : injected.rows) {
        if (row.p_value && *row.p_value < 0.05) {
            significant.insert(row.spec.key);
            o.require(row.direction == 1, row.spec.key + " has direction " + std::to_string(row.direction));
        }
        o.require(row.status == an::RowStatus::ok, row.spec.key + " not computed");
    }
    o.require(significant == expected, "significant rows differ from the injected ones");
    o.require(injected.rows.size() == an::report_manifest().size(), "row count differs from the manifest");

    opt.inject = false;
    const an::Report null_report = an::build_report(an::generate_dataset(opt));
    double min_p = 1.0;
    std::string min_key;
    for (const auto& row : null_report.rows) {
        if (row.p_value && *row.p_value < min_p) {
            min_p = *row.p_value;
            min_key = row.spec.key;
        }
    }
    o.require(min_p >= 0.01, "null dataset row " + min_key + " has p = " + std::to_string(min_p));
    o.detail << "n=18/group significant={";
    for (const auto& k : significant) o.detail << k << (k == *significant.rbegin() ? "" : ",");
    o.detail << "} null_min_p=" << min_p << " (" << min_key << ")";
}

// ---------------------------------------------------------------------------

void protocol(Outcome& o) {
    gen::Rng rng(694);
    std::size_t mismatched = 0;
    for (int i = 0; i < 10'000; ++i) {
        const auto m = gen::message(rng);
        const std::string bytes = holo::proto::encode(m);
        if (holo::proto::encode(holo::proto::decode(bytes)) != bytes) ++mismatched;
    }
    o.require(mismatched == 0, std::to_string(mismatched) + " messages changed bytes");
    std::size_t rejected = 0, accepted = 0, other = 0;
    for (int i = 0; i < 10'000; ++i) {
        std::string line = holo::proto::encode(gen::message(rng));
        const auto edits = gen::integer(rng, 1, 6);
        for (int k = 0; k < edits && !line.empty(); ++k) {
            const auto at = static_cast<std::size_t>(gen::integer(rng, 0, static_cast<std::int64_t>(line.size()) - 1));
            switch (gen::integer(rng, 0, 3)) {
            case 0: line[at] = static_cast<char>(gen::integer(rng, 0, 255)); break;
            case 1: line.erase(at, 1); break;
            case 2: line.insert(at, 1, "{}[]\",:\\0-e."[gen::integer(rng, 0, 12)]); break;
            default: line.resize(at); break;
            }
        }
        try {
            (void)holo::proto::encode(holo::proto::decode(line));
            ++accepted;
        } catch (const holo::Error&) {
            ++rejected;
        } catch (...) {
            ++other;
        }
    }
    o.require(other == 0, std::to_string(other) + " mutations escaped as non-protocol exceptions");
    o.detail << "round_trips=10000 fuzzed=10000 rejected=" << rejected << " accepted=" << accepted;
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<void(Outcome&)> run;
    };
    const Criterion criteria[] = {
        {"knowledge-test maximum and monotonicity", knowledge_test},
        {"mann-whitney exact oracle and U complement", mann_whitney},
        {"cohen kappa closed form", kappa},
        {"zero-crossing rate and energy of sines", acoustic},
        {"viewer projection", projection},
        {"ballistic handoff and paddle energy", ballistics},
        {"two-bone IK", inverse_kinematics},
        {"replay determinism", replay},
        {"two-group report pipeline", report},
        {"protocol round trip and fuzzing", protocol},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "threw: " << e.what();
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail.str() << std::endl;
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
