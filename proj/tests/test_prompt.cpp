#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "gradekit/prompt.hpp"
#include "gradekit/rubric.hpp"
#include "gradekit/util.hpp"
#include "testsupport.hpp"

using namespace gradekit;
namespace ts = gradekit::testsupport;

namespace {

Rubric clamp_rubric() {
  return parse_rubric(R"json({"exercise_id": "ex", "expression": "min(1, A + B + C)", "criteria": [
    {"label": "A", "description": "first half", "points": 0.5},
    {"label": "B", "description": "second half", "explanation": "grader hint", "points": 0.5},
    {"label": "C", "description": "extra aspect", "points": 0.25}]})json");
}

ExercisePacket packet() {
  ExercisePacket p;
  p.question = "What is a consensus sequence?";
  p.reference_answer = "The most frequent symbol per alignment column.";
  p.rubric = clamp_rubric();
  p.examples = {
      {"Example answer one", {'A'}, Rational(1, 2), "Half right."},
      {"Example answer two", {'A', 'B'}, Rational(1), "ok"},
      {"Example answer three", {}, Rational(0), "Off topic."},
      {"Example answer four", {'A', 'C'}, Rational(3, 4), "Close."},
  };
  p.submission = "My answer mentions the most frequent symbol.";
  p.submission_id = "a-1";
  return p;
}

size_t count_occurrences(const std::string& text, const std::string& needle) {
  size_t count = 0;
  for (size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("render includes sections per variant") {
  TemplateSet templates = TemplateSet::load_dir(ts::templates_dir());
  ExercisePacket p = packet();

  PromptBundle both = render(p, PromptVariant::RubricAndExamples, templates);
  CHECK(both.user_text.find("# Grading rubric") != std::string::npos);
  CHECK(both.user_text.find("# Graded examples") != std::string::npos);
  CHECK(both.user_text.find("Final score = min(1, A + B + C)") != std::string::npos);
  CHECK(both.user_text.find(p.question) != std::string::npos);
  CHECK(both.user_text.find(p.reference_answer) != std::string::npos);

  PromptBundle rubric_only = render(p, PromptVariant::RubricOnly, templates);
  CHECK(rubric_only.user_text.find("# Grading rubric") != std::string::npos);
  CHECK(rubric_only.user_text.find("# Graded examples") == std::string::npos);

  PromptBundle examples_only = render(p, PromptVariant::ExamplesOnly, templates);
  CHECK(examples_only.user_text.find("# Grading rubric") == std::string::npos);
  CHECK(examples_only.user_text.find("# Graded examples") != std::string::npos);

  // section order: question, reference, rubric, examples, submission
  size_t q = both.user_text.find("# Question");
  size_t r = both.user_text.find("# Reference answer");
  size_t g = both.user_text.find("# Grading rubric");
  size_t e = both.user_text.find("# Graded examples");
  size_t s = both.user_text.find(std::string(kSubmissionOpen));
  CHECK(q < r);
  CHECK(r < g);
  CHECK(g < e);
  CHECK(e < s);
}

TEST_CASE("system text is identical across exercises and variants") {
  TemplateSet templates = TemplateSet::load_dir(ts::templates_dir());
  ExercisePacket a = packet();
  ExercisePacket b = packet();
  b.question = "Entirely different question?";
  b.rubric.exercise_id = "other";
  std::string sys;
  for (auto variant : {PromptVariant::RubricOnly, PromptVariant::ExamplesOnly,
                       PromptVariant::RubricAndExamples}) {
    for (const auto& pk : {a, b}) {
      PromptBundle bundle = render(pk, variant, templates);
      if (sys.empty()) sys = bundle.system_text;
      CHECK(bundle.system_text == sys);
    }
  }
  // the response contract names all three fields
  CHECK(sys.find("score") != std::string::npos);
  CHECK(sys.find("feedback") != std::string::npos);
  CHECK(sys.find("satisfied_criteria") != std::string::npos);
}

TEST_CASE("rendering is deterministic") {
  TemplateSet templates = TemplateSet::load_dir(ts::templates_dir());
  ExercisePacket p = packet();
  PromptBundle first = render(p, PromptVariant::RubricAndExamples, templates);
  PromptBundle second = render(p, PromptVariant::RubricAndExamples, templates);
  CHECK(first.system_text == second.system_text);
  CHECK(first.user_text == second.user_text);
}

TEST_CASE("submission appears once inside delimiters, delimiter lines escaped") {
  TemplateSet templates = TemplateSet::load_dir(ts::templates_dir());
  ExercisePacket p = packet();
  p.submission = "line one\n" + std::string(kSubmissionOpen) + "\nline two";
  PromptBundle bundle = render(p, PromptVariant::RubricAndExamples, templates);
  // a line-based reader sees exactly one opening and one closing delimiter line
  size_t open_lines = 0, close_lines = 0;
  for (const auto& line : gradekit::split_lines(bundle.user_text)) {
    if (line == kSubmissionOpen) ++open_lines;
    if (line == kSubmissionClose) ++close_lines;
  }
  CHECK(open_lines == 1);
  CHECK(close_lines == 1);
  // the embedded delimiter line was neutralized with a leading space
  CHECK(bundle.user_text.find(" " + std::string(kSubmissionOpen)) != std::string::npos);
  CHECK(escape_submission(std::string(kSubmissionClose)) ==
        " " + std::string(kSubmissionClose));
}

TEST_CASE("examples-only variant demands examples") {
  TemplateSet templates = TemplateSet::load_dir(ts::templates_dir());
  ExercisePacket p = packet();
  p.examples.clear();
  CHECK_THROWS_AS(render(p, PromptVariant::ExamplesOnly, templates), PromptError);
  CHECK_NOTHROW(render(p, PromptVariant::RubricOnly, templates));
}

TEST_CASE("missing placeholder in a template is an error") {
  TemplateSet templates = TemplateSet::load_dir(ts::templates_dir());
  templates.user = "no placeholders at all";
  CHECK_THROWS_WITH_AS(render(packet(), PromptVariant::RubricAndExamples, templates),
                       doctest::Contains("missing template placeholder"), PromptError);
  TemplateSet unknown = TemplateSet::load_dir(ts::templates_dir());
  unknown.user += "{{mystery}}";
  CHECK_THROWS_WITH_AS(render(packet(), PromptVariant::RubricAndExamples, unknown),
                       doctest::Contains("unknown placeholder"), PromptError);
}

TEST_CASE("parse_response handles fences, prose and normalization") {
  Rubric rubric = clamp_rubric();
  GradeResponse r = parse_response(
      "```json\n{\"score\": 1.0, \"feedback\": \"Correct.\", \"satisfied_criteria\": "
      "[\"A\",\"B\"]}\n```",
      rubric);
  CHECK(r.score == Rational(1));
  CHECK(r.feedback == "Correct.");
  CHECK(r.satisfied == CriteriaSet{'A', 'B'});

  r = parse_response(
      "Sure! Here is the grade you asked for: {\"score\": 0.75, \"feedback\": \"ok\", "
      "\"satisfied_criteria\": [\"criterion a\", \"(C)\"]} Hope this helps!",
      rubric);
  CHECK(r.score == Rational(3, 4));
  CHECK(r.satisfied == CriteriaSet{'A', 'C'});
}

TEST_CASE("parse_response error cases") {
  Rubric rubric = clamp_rubric();
  CHECK_THROWS_AS(parse_response("no json here at all", rubric), ResponseParseError);
  try {
    parse_response("{\"score\": 0.5, \"feedback\": \"x\", \"satisfied_criteria\": [\"D\"]}",
                   rubric);
    FAIL("expected UnknownCriterion");
  } catch (const ResponseParseError& e) {
    CHECK(e.kind() == ResponseErrorKind::UnknownCriterion);
    CHECK(e.detail() == "D");
  }
  try {
    parse_response("{\"feedback\": \"x\", \"satisfied_criteria\": []}", rubric);
    FAIL("expected MissingField");
  } catch (const ResponseParseError& e) {
    CHECK(e.kind() == ResponseErrorKind::MissingField);
    CHECK(e.detail() == "score");
  }
  try {
    parse_response("{\"score\": -2, \"feedback\": \"x\", \"satisfied_criteria\": []}", rubric);
    FAIL("expected ScoreOutOfRange");
  } catch (const ResponseParseError& e) {
    CHECK(e.kind() == ResponseErrorKind::ScoreOutOfRange);
  }
}

TEST_CASE("a mis-tallied 1.25 parses and is corrected by the cross-check") {
  Rubric rubric = clamp_rubric();
  GradeResponse response = parse_response(
      "{\"score\": 1.25, \"feedback\": \"All three aspects present.\", "
      "\"satisfied_criteria\": [\"A\", \"B\", \"C\"]}",
      rubric);
  CHECK(response.score == Rational(5, 4));
  ReconciledGrade grade = crosscheck_tally(response, rubric);
  CHECK(grade.tally_mismatch);
  CHECK(grade.recomputed_score == Rational(1));
  CHECK(grade.final_score == Rational(1));
}

TEST_CASE("cross-check agrees when the grader tallied correctly") {
  Rubric rubric = clamp_rubric();
  GradeResponse ok{Rational(3, 4), "fine", {'A', 'C'}};
  ReconciledGrade grade = crosscheck_tally(ok, rubric);
  CHECK(!grade.tally_mismatch);
  CHECK(grade.final_score == Rational(3, 4));

  GradeResponse zero{Rational(0), "nothing", {}};
  grade = crosscheck_tally(zero, rubric);
  CHECK(!grade.tally_mismatch);
  CHECK(grade.final_score == Rational(0));
}

TEST_CASE("tone revision embeds the feedback verbatim and never the score") {
  TemplateSet templates = TemplateSet::load_dir(ts::templates_dir());
  PromptBundle bundle = render_tone_revision("ok", templates);
  CHECK(bundle.user_text.find("ok") != std::string::npos);
  CHECK(bundle.system_text.find("score") != std::string::npos);  // instruction not to add one

  std::string multi = "First paragraph of notes.\n\nSecond paragraph with more detail.";
  PromptBundle long_bundle = render_tone_revision(multi, templates);
  CHECK(long_bundle.user_text.find(multi) != std::string::npos);

  PromptBundle again = render_tone_revision(multi, templates);
  CHECK(again.user_text == long_bundle.user_text);
  CHECK(again.system_text == long_bundle.system_text);

  CHECK_THROWS_AS(render_tone_revision("", templates), PromptError);
  CHECK_THROWS_AS(render_tone_revision("   ", templates), PromptError);
}
