#include "aleph/rules.hpp"

namespace aleph {

namespace {

struct RuleInfo {
  std::string_view name;
  RuleClass cls;
};

constexpr std::array<RuleInfo, kRuleCount> kInfo{{
#define ALEPH_RULE_INFO(name, cls) {#name, RuleClass::cls},
    ALEPH_RULES(ALEPH_RULE_INFO)
#undef ALEPH_RULE_INFO
}};

constexpr std::array<Rule, kRuleCount> kAll{{
#define ALEPH_RULE_LIST(name, cls) Rule::name,
    ALEPH_RULES(ALEPH_RULE_LIST)
#undef ALEPH_RULE_LIST
}};

}  // namespace

std::string_view rule_name(Rule r) { return kInfo[static_cast<std::size_t>(r)].name; }

RuleClass rule_class(Rule r) { return kInfo[static_cast<std::size_t>(r)].cls; }

std::optional<Rule> parse_rule(std::string_view name) {
  for (std::size_t i = 0; i < kRuleCount; ++i) {
    if (kInfo[i].name == name) return kAll[i];
  }
  return std::nullopt;
}

const std::array<Rule, kRuleCount>& all_rules() { return kAll; }

}  // namespace aleph
