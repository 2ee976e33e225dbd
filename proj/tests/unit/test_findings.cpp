#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "hsprobe/error.hpp"
#include "hsprobe/findings/category.hpp"
#include "hsprobe/findings/client.hpp"
#include "hsprobe/findings/labeling.hpp"
#include "hsprobe/findings/records.hpp"
#include "hsprobe/findings/segment.hpp"
#include "hsprobe/io/binary.hpp"
#include "hsprobe/rng.hpp"
#include "test_util.hpp"

using namespace hsprobe;
using hsprobe::testing::fixture_dir;
using hsprobe::testing::TempDir;
using nlohmann::json;

namespace {

const std::string kReference =
    "Heart size is normal. There is a small left pleural effusion. No pneumothorax. Right PICC "
    "line tip in the SVC.";

Finding make_finding(const std::string& id, const std::string& text) {
    Finding f;
    f.finding_id = id;
    f.study_id = "st1";
    f.subject_id = "s1";
    f.text = text;
    return f;
}

RetryPolicy no_sleep() {
    RetryPolicy r;
    r.sleep = [](std::chrono::milliseconds) {};
    return r;
}

// Fails a fixed number of times, then answers.
class FlakyClient final : public EntailmentClient {
public:
    FlakyClient(int failures, std::string answer) : failures_(failures), answer_(std::move(answer)) {}
    std::string complete(const ClientRequest&) override {
        ++calls;
        if (calls <= failures_) {
            fail(ErrorCode::kIo, "connection reset");
        }
        return answer_;
    }
    int calls = 0;

private:
    int failures_;
    std::string answer_;
};

}  // namespace

TEST(Segment, ThreeWayNegationSplit) {
    EXPECT_EQ(segment_report("No evidence of pneumonia, pneumothorax, or pleural effusion."),
              (std::vector<std::string>{"No evidence of pneumonia", "No evidence of pneumothorax",
                                        "No evidence of pleural effusion"}));
}

TEST(Segment, SinglePositiveClaim) {
    EXPECT_EQ(segment_report("There is pneumonia."), std::vector<std::string>{"There is pneumonia"});
}

TEST(Segment, DegenerateInputGivesNothing) {
    EXPECT_TRUE(segment_report("").empty());
    EXPECT_TRUE(segment_report(" . ! ").empty());
}

TEST(Segment, CuratedCorpusMatchesExactly) {
    std::ifstream in(fixture_dir() / "segmentation_corpus.jsonl");
    ASSERT_TRUE(in.good());
    std::string line;
    int cases = 0;
    while (std::getline(in, line)) {
        const json j = json::parse(line);
        const auto expected = j.at("expected").get<std::vector<std::string>>();
        EXPECT_EQ(segment_report(j.at("report").get<std::string>()), expected) << line;
        ++cases;
    }
    EXPECT_EQ(cases, 20);
}

TEST(Segment, GeneratedListsCoverTheirEntitiesExactly) {
    const std::vector<std::string> heads = {"No", "No evidence of", "There is no", "Negative for"};
    const std::vector<std::string> nouns = {"pneumonia", "focal consolidation", "pleural effusion",
                                            "pneumothorax", "pulmonary edema", "free air",
                                            "acute fracture", "cardiomegaly"};
    Rng rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        const std::string& head = heads[rng.below(heads.size())];
        const std::size_t n = 1 + rng.below(5);
        std::vector<std::string> items;
        for (std::size_t i = 0; i < n; ++i) {
            items.push_back(nouns[rng.below(nouns.size())]);
        }
        std::string sentence = head + " " + items[0];
        for (std::size_t i = 1; i < n; ++i) {
            const bool last = i + 1 == n;
            if (!last) {
                sentence += ", ";
            } else {
                static const std::vector<std::string> finals = {", or ", ", and ", " or ", " and "};
                sentence += finals[rng.below(finals.size())];
            }
            sentence += items[i];
        }
        sentence += ".";

        const auto claims = segment_report(sentence);
        ASSERT_EQ(claims.size(), n) << sentence;
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_EQ(claims[i], head + " " + items[i]) << sentence;
            EXPECT_FALSE(claims[i].empty());
        }
        if (n >= 2) {
            EXPECT_EQ(negated_entities(sentence), items);
        }
    }
}

TEST(Segment, SentencesKeepDecimalsTogether) {
    EXPECT_EQ(split_sentences("Tube is 4.5 cm above the carina. Stable."),
              (std::vector<std::string>{"Tube is 4.5 cm above the carina.", "Stable."}));
}

TEST(Labels, HallucinatedIsAPureFunctionOfEntailment) {
    for (Entailment e : kAllEntailments) {
        const auto label = HallucinationLabel::from(e);
        EXPECT_EQ(label.hallucinated, e != Entailment::kCompletely);
        EXPECT_EQ(label, HallucinationLabel::from(e));
    }
    EXPECT_TRUE(HallucinationLabel::from(Entailment::kPartially).hallucinated);
    EXPECT_FALSE(HallucinationLabel::from(Entailment::kCompletely).hallucinated);
}

TEST(Labels, EntailmentReplayIsStableAcrossRuns) {
    const std::vector<std::pair<std::string, Entailment>> expected = {
        {"Heart size is normal", Entailment::kCompletely},
        {"There is a small left pleural effusion", Entailment::kCompletely},
        {"There is a large left pleural effusion", Entailment::kPartially},
        {"There is a right pleural effusion", Entailment::kPartially},
        {"There is a left apical pneumothorax", Entailment::kNotEntailed},
        {"No pneumothorax", Entailment::kCompletely},
        {"Moderate cardiomegaly", Entailment::kNotEntailed},
        {"Right PICC line tip in the SVC", Entailment::kCompletely},
        {"Endotracheal tube in standard position", Entailment::kNotEntailed},
        {"Right lower lobe pneumonia", Entailment::kPartially},
    };
    for (int run = 0; run < 2; ++run) {
        ReplayClient client = ReplayClient::load(fixture_dir() / "entailment_replay.jsonl");
        ASSERT_EQ(client.size(), 10u);
        for (std::size_t i = 0; i < expected.size(); ++i) {
            const Finding f = make_finding("f" + std::to_string(i), expected[i].first);
            EXPECT_EQ(label_finding(f, kReference, client, no_sleep()),
                      HallucinationLabel::from(expected[i].second))
                << expected[i].first;
        }
    }
}

TEST(Labels, ConcurrentReplayReadsAgree) {
    ReplayClient client = ReplayClient::load(fixture_dir() / "entailment_replay.jsonl");
    const Finding f = make_finding("f", "There is a right pleural effusion");
    std::atomic<int> agree{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&] {
            for (int i = 0; i < 50; ++i) {
                if (label_finding(f, kReference, client, no_sleep()).entailment == Entailment::kPartially) {
                    ++agree;
                }
            }
        });
    }
    for (auto& th : threads) {
        th.join();
    }
    EXPECT_EQ(agree.load(), 200);
}

TEST(Labels, RetriesThenSucceeds) {
    FlakyClient client(2, R"({"entailment": "partially"})");
    std::vector<std::chrono::milliseconds> sleeps;
    RetryPolicy retry;
    retry.base_backoff = std::chrono::milliseconds(10);
    retry.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
    const auto label = label_finding(make_finding("f", "x"), kReference, client, retry);
    EXPECT_TRUE(label.hallucinated);
    EXPECT_EQ(client.calls, 3);
    EXPECT_EQ(sleeps, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(10),
                                                               std::chrono::milliseconds(20)}));
}

TEST(Labels, ExhaustedRetriesReportLabelingFailure) {
    FlakyClient client(3, R"({"entailment": "completely"})");
    try {
        label_finding(make_finding("f", "x"), kReference, client, no_sleep());
        FAIL() << "expected a labeling failure";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kLabelingFailure);
    }
    EXPECT_EQ(client.calls, 3);

    FlakyClient garbage(0, "maybe?");
    EXPECT_THROW(label_finding(make_finding("f", "x"), kReference, garbage, no_sleep()), Error);
    EXPECT_EQ(garbage.calls, 3);

    ReplayClient empty = ReplayClient::parse("");
    EXPECT_THROW(label_finding(make_finding("f", "x"), kReference, empty, no_sleep()), Error);
}

TEST(Severity, ReplayFixtureGivesStableTiers) {
    const std::vector<std::pair<std::string, int>> expected = {
        {"There is no pneumothorax", 1},
        {"There is a left apical pneumothorax", 1},
        {"Endotracheal tube terminates in the right mainstem bronchus", 1},
        {"Small right upper lobe nodule", 2},
        {"Moderate cardiomegaly", 2},
        {"Small left pleural effusion", 2},
        {"Azygos fissure", 3},
        {"Degenerative changes of the thoracic spine", 3},
        {"Single portable view of the chest", 4},
        {"Comparison made to prior study", 4},
        {"Mild pulmonary edema", 2},  // unreadable first reply, answered on re-ask
    };
    for (int run = 0; run < 2; ++run) {
        ReplayClient client = ReplayClient::load(fixture_dir() / "severity_replay.jsonl");
        for (const auto& [text, tier] : expected) {
            const SeverityResult r = classify_severity(make_finding("f", text), client, no_sleep());
            EXPECT_EQ(r.tier, tier) << text;
            EXPECT_FALSE(r.reason.empty());
            EXPECT_EQ(r.clinically_significant(), tier <= 2);
        }
    }
}

TEST(Severity, NegatedPneumothoraxIsEmergency) {
    ReplayClient client = ReplayClient::load(fixture_dir() / "severity_replay.jsonl");
    EXPECT_EQ(classify_severity(make_finding("f", "There is no pneumothorax"), client).tier, 1);
}

TEST(Severity, MissingCategoryIsAFailureAfterOneReAsk) {
    ReplayClient client = ReplayClient::load(fixture_dir() / "severity_replay.jsonl");
    try {
        classify_severity(make_finding("f", "Old healed right rib fractures"), client, no_sleep());
        FAIL() << "expected a labeling failure";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kLabelingFailure);
    }
    FlakyClient counting(0, R"({"reason": "no category"})");
    EXPECT_THROW(classify_severity(make_finding("f", "x"), counting, no_sleep()), Error);
    EXPECT_EQ(counting.calls, 2);
}

TEST(Severity, ResponseParsing) {
    EXPECT_EQ(parse_severity_response(R"({"severity_category": "other", "reason": "r"})")->tier, 4);
    EXPECT_FALSE(parse_severity_response(R"({"reason": "r"})").has_value());
    EXPECT_FALSE(parse_severity_response(R"({"severity_category": "catastrophic"})").has_value());
    EXPECT_FALSE(parse_severity_response("no json here").has_value());
    EXPECT_EQ(parse_severity_response("Sure: {\"severity_category\": \"Emergency clinical "
                                      "consequence\", \"reason\": \"a {brace} inside\"}")
                  ->tier,
              1);
}

TEST(Severity, PromptResourceCarriesTheResponseContract) {
    const std::string prompt = io::read_text_file(resource_path("severity_prompt.txt"));
    EXPECT_NE(prompt.find("\"severity_category\""), std::string::npos);
    EXPECT_NE(prompt.find("There is no pneumothorax"), std::string::npos);
    EXPECT_NE(prompt.find("non-emergency but actionable clinical consequence"), std::string::npos);
}

TEST(Client, RecordThenReplayReproducesResponses) {
    TempDir dir;
    FlakyClient inner(0, R"({"entailment": "not_entailed"})");
    RecordingClient recorder(inner, dir / "log.jsonl");
    const Finding f = make_finding("f", "There is a mass");
    const auto live = label_finding(f, kReference, recorder, no_sleep());

    ReplayClient replay = ReplayClient::load(dir / "log.jsonl");
    EXPECT_EQ(replay.size(), 1u);
    EXPECT_EQ(label_finding(f, kReference, replay, no_sleep()), live);
}

TEST(Client, LiveClientTalksToAChatCompletionsEndpoint) {
    httplib::Server server;
    std::string seen_auth;
    json seen_body;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        seen_body = json::parse(req.body);
        const json reply = {
            {"choices",
             json::array({{{"message",
                            {{"role", "assistant"},
                             {"content", R"({"severity_category": "emergency clinical consequence", "reason": "r"})"}}}}})}};
        res.set_content(reply.dump(), "application/json");
    });
    server.Post("/broken/v1/chat/completions",
                [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    LiveClientConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
    cfg.api_key = "test-key";
    cfg.model = "mock-model";
    LiveClient client(cfg);
    const SeverityResult r = classify_severity(make_finding("f", "There is no pneumothorax"), client);
    EXPECT_EQ(r.tier, 1);
    EXPECT_EQ(seen_auth, "Bearer test-key");
    EXPECT_EQ(seen_body.at("model"), "mock-model");
    EXPECT_EQ(seen_body.at("messages").at(1).at("content"), "F: There is no pneumothorax");
    EXPECT_NE(seen_body.at("messages").at(0).at("content").get<std::string>().find("severity_category"),
              std::string::npos);

    cfg.base_url += "/broken";
    LiveClient broken(cfg);
    try {
        label_finding(make_finding("f", "x"), kReference, broken, no_sleep());
        FAIL() << "expected a labeling failure";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kLabelingFailure);
    }

    server.stop();
    thread.join();
}

TEST(Category, DirectKeywords) {
    EXPECT_EQ(assign_category(make_finding("a", "There is a left pleural effusion")), Category::kPleural);
    EXPECT_EQ(assign_category(make_finding("b", "Endotracheal tube in standard position")),
              Category::kDevices);
    EXPECT_EQ(assign_category(make_finding("c", "Comparison is made")), Category::kOther);
}

TEST(Category, HandLabeledFixtureMatchesExactly) {
    std::ifstream in(fixture_dir() / "category_fixture.tsv");
    ASSERT_TRUE(in.good());
    std::string line;
    int cases = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto tab = line.find('\t');
        ASSERT_NE(tab, std::string::npos);
        const Finding f = make_finding("x", line.substr(0, tab));
        EXPECT_EQ(category_name(assign_category(f)), line.substr(tab + 1)) << line;
        ++cases;
    }
    EXPECT_EQ(cases, 25);
}

TEST(Category, WordBoundaryMatching) {
    EXPECT_TRUE(contains_keyword("Left PICC line", "line"));
    EXPECT_FALSE(contains_keyword("Midline sternotomy wires", "line"));
    EXPECT_TRUE(contains_keyword("small PLEURAL EFFUSION.", "pleural effusion"));
    EXPECT_FALSE(contains_keyword("effusions", "effusion"));
    EXPECT_FALSE(contains_keyword("anything", ""));
}

TEST(Category, AssignmentIsTotalAndDeterministic) {
    Rng rng(3);
    const std::string alphabet = "abcdefghijklmnopqrstuvwxyz -,.";
    for (int i = 0; i < 300; ++i) {
        std::string text;
        const std::size_t n = rng.below(40);
        for (std::size_t k = 0; k < n; ++k) {
            text += alphabet[rng.below(alphabet.size())];
        }
        const Category c = CategoryRules::builtin().assign(text);
        EXPECT_EQ(c, CategoryRules::builtin().assign(text));
    }
}

TEST(Category, RulesRejectUnknownCategories) {
    EXPECT_THROW(CategoryRules::parse("spleen: spleen"), Error);
    EXPECT_THROW(CategoryRules::parse("lungs lung"), Error);
    EXPECT_EQ(CategoryRules::parse("# c\npleural: effusion\n").rules().size(), 1u);
}

TEST(Category, BuiltinKeywordListHasNineEntries) {
    EXPECT_EQ(builtin_keywords(),
              (std::vector<std::string>{"pleural effusion", "pneumothorax", "consolidation", "pneumonia",
                                        "edema", "atelectasis", "tube", "right", "left"}));
}

TEST(Records, RoundTrip) {
    std::vector<Finding> fs;
    Finding a = make_finding("s1_st1_0", "No evidence of pneumonia \xE2\x80\x94 \"quoted\"");
    a.token_count = 7;
    a.category = Category::kLungs;
    a.severity_tier = 2;
    a.label = HallucinationLabel::from(Entailment::kPartially);
    fs.push_back(a);
    Finding b = make_finding("s1_st1_1", "Heart size is normal");
    fs.push_back(b);
    const std::string text = encode_findings(fs);
    EXPECT_EQ(decode_findings(text), fs);
    EXPECT_EQ(encode_findings(decode_findings(text)), text);
}

TEST(Records, RejectsInconsistentRecords) {
    EXPECT_THROW(decode_finding_line(R"({"finding_id":"a","text":"t","entailment":"completely","hallucinated":true})"),
                 Error);
    EXPECT_THROW(decode_finding_line(R"({"finding_id":"a","text":"t","surprise":1})"), Error);
    EXPECT_THROW(decode_finding_line(R"({"finding_id":"a","text":""})"), Error);
    EXPECT_THROW(decode_finding_line(R"({"finding_id":"a","text":"t","severity_tier":5})"), Error);
    EXPECT_THROW(decode_finding_line("not json"), Error);

    std::vector<Finding> fs = {make_finding("a", "t"), make_finding("b", "t")};
    fs[1].subject_id = "other";
    EXPECT_THROW(check_findings_consistent(fs), Error);
}
