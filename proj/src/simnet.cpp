#include "mec/simnet.hpp"

#include <algorithm>
#include <stdexcept>

namespace mec {

namespace {

struct Envelope {
    std::size_t seq = 0;
    std::size_t enqueued_at = 0;
    ProtocolMessage msg;
};

std::string commitment_prefix(const Bytes& c) {
    if (c.empty()) return "";
    return hex(c.data(), std::min<std::size_t>(4, c.size()));
}

Fragment corrupted(const Fragment& frag, std::uint64_t q) {
    if (!frag.has_value() || frag->empty()) return frag;
    Fragment out = frag;
    (*out)[0] = ((*out)[0] + 1) % q;
    return out;
}

class Simulation {
public:
    explicit Simulation(const Scenario& scenario)
        : sc_(scenario),
          n_(scenario.config.n()),
          rng_(scenario.seed) {
        for (std::size_t i = 0; i < n_; ++i) {
            servers_.push_back(make_server(static_cast<int>(i)));
            filters_.emplace_back();
            budget_used_.push_back(0);
        }
        for (int r : sc_.retrievers) {
            retrievers_.push_back(make_retriever(r));
            retriever_filters_.emplace_back();
        }
        result_.outputs.resize(n_);
        result_.retrieved.resize(sc_.retrievers.size());
        validate();
    }

    RunResult run() {
        start_dealer();
        event_loop();
        if (!retrievers_.empty() && !result_.step_cap_hit) {
            for (std::size_t i = 0; i < retrievers_.size(); ++i) {
                for (auto& m : retrieve_init(sc_.config, retrievers_[i].self)) enqueue(m);
            }
            event_loop();
        }
        finish();
        return std::move(result_);
    }

private:
    Behavior behavior_of(int server) const {
        auto it = sc_.behaviors.find(server);
        return it == sc_.behaviors.end() ? Behavior{} : it->second;
    }

    bool is_corrupt(int server) const { return sc_.corrupt >> server & 1; }

    void validate() const {
        if (sc_.corrupt != 0 &&
            !std::any_of(sc_.config.ctx.fail_prone.begin(), sc_.config.ctx.fail_prone.end(),
                         [&](NodeMask f) { return (sc_.corrupt & ~f) == 0; })) {
            throw std::invalid_argument("corrupt set is not inside any fail-prone set");
        }
        for (const auto& [server, behavior] : sc_.behaviors) {
            if (behavior.kind != Behavior::Honest && !is_corrupt(server)) {
                throw std::invalid_argument("byzantine behavior assigned to an honest server");
            }
        }
        for (const auto& d : sc_.script) {
            if (d.kind == Directive::Drop) {
                const bool from_corrupt = d.pattern.from && is_corrupt(*d.pattern.from);
                const bool to_corrupt = d.pattern.to && is_corrupt(*d.pattern.to);
                if (!from_corrupt && !to_corrupt) {
                    throw std::invalid_argument("drop directives must target a corrupt endpoint");
                }
            }
            if (d.kind == Directive::Inject && !is_corrupt(d.message.sender)) {
                throw std::invalid_argument("injected messages must come from a corrupt server");
            }
        }
    }

    void start_dealer() {
        const Behavior b = behavior_of(sc_.dealer);
        switch (b.kind) {
            case Behavior::Honest:
            case Behavior::Crash:
            case Behavior::CorruptFragment: {
                auto sends = disperse_init(sc_.config, sc_.dealer, sc_.file);
                if (b.kind == Behavior::CorruptFragment) {
                    for (auto& m : sends) {
                        if (b.targets >> m.receiver & 1) {
                            m.fragment = corrupted(*m.fragment, sc_.config.code.field().q);
                        }
                    }
                }
                send_all(sc_.dealer, std::move(sends));
                break;
            }
            case Behavior::Equivocate: {
                std::vector<std::uint64_t> alt = sc_.file;
                alt[0] = (alt[0] + 1) % sc_.config.code.field().q;
                auto sends_a = disperse_init(sc_.config, sc_.dealer, sc_.file);
                auto sends_b = disperse_init(sc_.config, sc_.dealer, alt);
                std::vector<ProtocolMessage> sends;
                for (std::size_t j = 0; j < n_; ++j) {
                    sends.push_back(b.group_a >> j & 1 ? sends_a[j] : sends_b[j]);
                }
                send_all(sc_.dealer, std::move(sends));
                break;
            }
            case Behavior::Mute:
                break;
        }
    }

    void send_all(int sender, std::vector<ProtocolMessage> msgs) {
        const Behavior b = behavior_of(sender);
        for (auto& m : msgs) {
            if (b.kind == Behavior::Mute) continue;
            if (b.kind == Behavior::Crash && budget_used_[static_cast<std::size_t>(sender)] >= b.send_budget) {
                continue;
            }
            if (b.kind == Behavior::CorruptFragment && m.fragment.has_value() &&
                m.kind != MsgKind::Send) {
                m.fragment = corrupted(*m.fragment, sc_.config.code.field().q);
            }
            ++budget_used_[static_cast<std::size_t>(sender)];
            enqueue(std::move(m));
        }
    }

    void enqueue(ProtocolMessage msg) {
        result_.metrics.sent_by_kind[msg_kind_name(msg.kind)] += 1;
        result_.metrics.total_bytes += msg.wire_bytes();
        if (msg.kind == MsgKind::Ready && !is_corrupt(msg.sender)) {
            auto& seen = result_.honest_ready_commitments;
            if (std::find(seen.begin(), seen.end(), msg.commitment) == seen.end()) {
                seen.push_back(msg.commitment);
            }
        }
        Envelope env{next_seq_++, step_, std::move(msg)};
        if (matches_drop(env.msg)) {
            record(env.msg, true);
            return;
        }
        pending_.push_back(std::move(env));
    }

    bool matches_drop(const ProtocolMessage& m) const {
        return std::any_of(drops_.begin(), drops_.end(),
                           [&](const MsgPattern& p) { return p.matches(m); });
    }

    bool eligible(const Envelope& env) const {
        return std::none_of(delays_.begin(), delays_.end(), [&](const auto& rule) {
            return rule.second > step_ && rule.first.matches(env.msg);
        });
    }

    void record(const ProtocolMessage& m, bool dropped) {
        result_.transcript.push_back(
            {step_, m.sender, m.receiver, m.kind, commitment_prefix(m.commitment), dropped});
    }

    // Runs script directives until the next Deliver (or exhaustion); returns
    // the forced delivery when one applies.
    std::optional<std::size_t> consume_script() {
        while (script_pos_ < sc_.script.size()) {
            const Directive& d = sc_.script[script_pos_];
            switch (d.kind) {
                case Directive::Delay:
                    delays_.emplace_back(d.pattern, step_ + d.steps);
                    ++script_pos_;
                    break;
                case Directive::Drop: {
                    drops_.push_back(d.pattern);
                    ++script_pos_;
                    auto it = pending_.begin();
                    while (it != pending_.end()) {
                        if (d.pattern.matches(it->msg)) {
                            record(it->msg, true);
                            it = pending_.erase(it);
                        } else {
                            ++it;
                        }
                    }
                    break;
                }
                case Directive::Inject:
                    ++script_pos_;
                    enqueue(d.message);
                    break;
                case Directive::Deliver: {
                    ++script_pos_;
                    for (std::size_t i = 0; i < pending_.size(); ++i) {
                        if (d.pattern.matches(pending_[i].msg) && eligible(pending_[i])) return i;
                    }
                    break;  // nothing matches: directive is a no-op
                }
            }
        }
        return std::nullopt;
    }

    void event_loop() {
        while (true) {
            if (step_ >= sc_.step_cap) {
                result_.step_cap_hit = true;
                return;
            }
            auto forced = consume_script();
            std::size_t pick = pending_.size();
            if (forced) {
                pick = *forced;
            } else {
                std::vector<std::size_t> choices;
                for (std::size_t i = 0; i < pending_.size(); ++i) {
                    if (eligible(pending_[i])) choices.push_back(i);
                }
                if (choices.empty()) {
                    if (pending_.empty() && script_pos_ >= sc_.script.size()) return;  // quiescent
                    ++step_;  // let delays expire
                    continue;
                }
                // Oldest-first fallback keeps every message eventually delivered.
                const Envelope& oldest = pending_[choices.front()];
                if (sc_.fairness && step_ - oldest.enqueued_at >= sc_.fair_bound) {
                    pick = choices.front();
                } else {
                    pick = choices[static_cast<std::size_t>(rng_.below(choices.size()))];
                }
            }
            Envelope env = std::move(pending_[pick]);
            pending_.erase(pending_.begin() + static_cast<long>(pick));
            ++step_;
            record(env.msg, false);
            dispatch(env.msg);
        }
    }

    void dispatch(const ProtocolMessage& msg) {
        const int receiver = msg.receiver;
        if (msg.kind == MsgKind::Retrieve) {
            const Behavior b = behavior_of(receiver);
            if (b.kind == Behavior::Mute || b.kind == Behavior::Equivocate) return;
            if (b.kind == Behavior::Crash &&
                budget_used_[static_cast<std::size_t>(receiver)] >= b.send_budget) {
                return;
            }
            auto reply = handle_retrieve(sc_.config, servers_[static_cast<std::size_t>(receiver)], msg);
            if (reply) send_all(receiver, {*reply});
            return;
        }
        if (msg.kind == MsgKind::FragmentReply) {
            for (std::size_t i = 0; i < retrievers_.size(); ++i) {
                if (retrievers_[i].self != receiver) continue;
                if (!retriever_filters_[i].accept(msg)) return;
                auto out = handle_fragment(sc_.config, retrievers_[i], msg);
                if (out) result_.retrieved[i] = out;
                return;
            }
            return;  // fragment addressed to a non-retriever
        }

        const Behavior b = behavior_of(receiver);
        if (b.kind == Behavior::Mute || b.kind == Behavior::Equivocate) return;
        if (b.kind == Behavior::Crash &&
            budget_used_[static_cast<std::size_t>(receiver)] >= b.send_budget) {
            return;
        }
        if (!filters_[static_cast<std::size_t>(receiver)].accept(msg)) return;
        StepResult step = handle_message(sc_.config, servers_[static_cast<std::size_t>(receiver)], msg);
        for (const auto& out : step.outputs) {
            if (!result_.outputs[static_cast<std::size_t>(receiver)]) {
                result_.outputs[static_cast<std::size_t>(receiver)] = out;
            }
        }
        send_all(receiver, std::move(step.outbox));
    }

    void finish() {
        result_.metrics.steps = step_;
        result_.metrics.stored_bytes_per_server.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            result_.metrics.stored_bytes_per_server[i] = stored_bytes(sc_.config, servers_[i]);
            if (!is_corrupt(static_cast<int>(i)) && servers_[i].stored) {
                result_.honest_stored |= NodeMask{1} << i;
            }
        }
    }

    const Scenario& sc_;
    std::size_t n_;
    SplitMix64 rng_;
    std::vector<ServerState> servers_;
    std::vector<DeliveryFilter> filters_;
    std::vector<RetrieverState> retrievers_;
    std::vector<DeliveryFilter> retriever_filters_;
    std::vector<std::size_t> budget_used_;
    std::vector<Envelope> pending_;
    std::vector<MsgPattern> drops_;
    std::vector<std::pair<MsgPattern, std::size_t>> delays_;
    std::size_t script_pos_ = 0;
    std::size_t step_ = 0;
    std::size_t next_seq_ = 0;
    RunResult result_;
};

}  // namespace

bool MsgPattern::matches(const ProtocolMessage& m) const {
    if (from && *from != m.sender) return false;
    if (to && *to != m.receiver) return false;
    if (kind && *kind != m.kind) return false;
    return true;
}

std::string transcript_text(const RunResult& result, const Universe& universe) {
    std::string out;
    for (const auto& e : result.transcript) {
        out += "{\"step\":" + std::to_string(e.step) + ",\"from\":\"" + universe.name(e.from) +
               "\",\"to\":\"" + universe.name(e.to) + "\",\"kind\":\"" + msg_kind_name(e.kind) +
               "\",\"D_prefix_8hex\":\"" + e.d_prefix + "\",\"dropped\":" +
               (e.dropped ? "true" : "false") + "}\n";
    }
    return out;
}

RunResult run(const Scenario& scenario) { return Simulation(scenario).run(); }

std::vector<std::string> check_execution(const Scenario& scenario, const RunResult& result) {
    std::vector<std::string> violations;
    const std::size_t n = scenario.config.n();

    if (result.honest_ready_commitments.size() > 1) violations.push_back("unique-D");

    std::size_t honest_total = 0, honest_stored = 0, honest_aborted = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (scenario.corrupt >> i & 1) continue;
        ++honest_total;
        const auto& out = result.outputs[i];
        if (out && out->kind == ServerOutput::Stored) ++honest_stored;
        if (out && out->kind == ServerOutput::Aborted) ++honest_aborted;
    }
    if (honest_stored > 0 && honest_aborted > 0) violations.push_back("abort-consistency");
    if (honest_stored != 0 && honest_stored != honest_total) violations.push_back("agreement");

    const bool dealer_honest = !(scenario.corrupt >> scenario.dealer & 1);
    if (dealer_honest && scenario.fairness && !result.step_cap_hit &&
        honest_stored != honest_total) {
        violations.push_back("termination");
    }
    if (result.step_cap_hit && dealer_honest && scenario.fairness) {
        violations.push_back("liveness-step-cap");
    }

    const bool kernel_stored =
        contains_member(scenario.config.ctx.kernels, result.honest_stored);
    for (std::size_t i = 0; i < scenario.retrievers.size(); ++i) {
        if (scenario.corrupt >> scenario.retrievers[i] & 1) continue;
        if (kernel_stored && !result.retrieved[i].has_value()) {
            violations.push_back("availability");
        }
        if (result.retrieved[i].has_value()) {
            if (dealer_honest && *result.retrieved[i] != scenario.file) {
                violations.push_back("correctness");
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (result.retrieved[j].has_value() && *result.retrieved[j] != *result.retrieved[i]) {
                    violations.push_back("correctness-agreement");
                }
            }
        }
    }

    auto count = [&](const char* kind) {
        auto it = result.metrics.sent_by_kind.find(kind);
        return it == result.metrics.sent_by_kind.end() ? std::size_t{0} : it->second;
    };
    const std::size_t retrievals = scenario.retrievers.size();
    if (count("send") > n || count("echo") > n * n || count("ready") > n * n ||
        count("retrieve") > n * retrievals || count("fragment") > n * retrievals) {
        violations.push_back("message-bounds");
    }
    return violations;
}

SweepReport sweep(const Scenario& base, std::uint64_t seed_from, std::uint64_t seed_to) {
    SweepReport report;
    for (std::uint64_t seed = seed_from; seed < seed_to; ++seed) {
        Scenario scenario = base;
        scenario.seed = seed;
        const RunResult result = run(scenario);
        ++report.executions;

        std::size_t honest_total = 0, honest_stored = 0;
        for (std::size_t i = 0; i < scenario.config.n(); ++i) {
            if (scenario.corrupt >> i & 1) continue;
            ++honest_total;
            if (result.honest_stored >> i & 1) ++honest_stored;
        }
        if (honest_stored == honest_total) ++report.terminations;

        for (const auto& v : check_execution(scenario, result)) {
            report.violations.emplace_back(seed, v);
        }
    }
    return report;
}

}  // namespace mec
