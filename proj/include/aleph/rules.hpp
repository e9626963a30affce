#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace aleph {

enum class RuleClass : std::uint8_t {
  Step,        // M1 -a-> M2
  Fail,        // M |-> F
  Error,       // M |-> E
  Value,       // letrec value evaluates to a head
  ValueError,  // letrec value is erroneous
  Program,     // whole-program judgement
};

// clang-format off
#define ALEPH_RULES(X)                                                                  \
  /* generate mode */                                                                   \
  X(RGctxt, Step) X(RGctxtF, Fail) X(RGctxtE, Error)                                    \
  X(RGvar, Step) X(RGvarE, Error)                                                       \
  X(RGfalsesF, Fail) X(RGanysE, Error)                                                  \
  X(RGi, Step) X(RGintsE, Error)                                                        \
  X(RGuop, Step) X(RGbop, Step) X(RGcop, Step) X(RGcopF, Fail)                          \
  X(RGuopE, Error) X(RGbopE, Error) X(RGcopE, Error)                                    \
  X(RGtab1, Step) X(RGtab2, Step) X(RGtabF, Fail) X(RGtabE, Error)                      \
  X(RGarr, Step) X(RGarrE, Error) X(RGtabsE, Error)                                     \
  X(RGfun, Step) X(RGfunE, Error) X(RGfunsE, Error)                                     \
  X(RGlen, Step) X(RGlenE, Error)                                                       \
  X(RGappE1, Step) X(RGappE2, Step) X(RGappE3, Step)                                    \
  X(RGappEE1, Error) X(RGappEE2, Error)                                                 \
  X(RGappF1, Step) X(RGappFF, Fail) X(RGappF2, Step) X(RGappF3, Step) X(RGappF4, Step)  \
  X(RGappFE1, Error) X(RGappFE2, Error) X(RGappFE3, Error)                              \
  X(RGfromE, Error)                                                                     \
  X(RGnew, Step) X(RGread, Step) X(RGwrite, Step)                                       \
  X(RGnewE, Error) X(RGreadE, Error) X(RGwriteE, Error)                                 \
  X(RGptrE, Error) X(RGptrsE, Error)                                                    \
  X(RGin, Step) X(RGout, Step) X(RGinE, Error) X(RGoutE, Error)                         \
  X(RGunify, Step) X(RGjoinE, Error)                                                    \
  X(RGlet, Step)                                                                        \
  X(RGletrec, Step) X(RGletrecE1, Error) X(RGletrecE2, Error)                           \
  X(RGif, Step) X(RGif1, Step) X(RGif2, Step) X(RGif3, Step) X(RGifE, Error)            \
  X(RGstage, Step) X(RGfxE, Error)                                                      \
  X(RGframe1, Step) X(RGframe2, Step) X(RGframeF, Fail) X(RGframeE, Error)              \
  /* letrec values */                                                                   \
  X(RVtable, Value) X(RVfun, Value) X(RVptr, Value)                                     \
  X(RVtableE, ValueError) X(RVfunE, ValueError) X(RVptrE, ValueError)                   \
  /* test mode */                                                                       \
  X(RTgen, Step) X(RTvar, Step) X(RTvarE, Error)                                        \
  X(RTfalses, Step) X(RTanys, Step)                                                     \
  X(RTi1, Step) X(RTi2, Step) X(RTints1, Step) X(RTints2, Step)                         \
  X(RTiE, Error) X(RTintsE, Error)                                                      \
  X(RTcop, Step)                                                                        \
  X(RTtab1, Step) X(RTtab2, Step) X(RTarr1, Step) X(RTarr2, Step)                       \
  X(RTtabs1, Step) X(RTtabs2, Step)                                                     \
  X(RTtabE, Error) X(RTarrE, Error) X(RTtabsE, Error)                                   \
  X(RTfun, Step) X(RTfuns1, Step) X(RTfuns2, Step)                                      \
  X(RTfunE1, Error) X(RTfunE2, Error) X(RTfunsE, Error)                                 \
  X(RTfrom1, Step) X(RTfrom2, Step) X(RTfromE, Error)                                   \
  X(RTptrs1, Step) X(RTptrs2, Step) X(RTptrsE, Error)                                   \
  X(RTunify, Step) X(RTjoin, Step) X(RTlet, Step) X(RTletrec, Step) X(RTif, Step)       \
  X(RTstage, Step)                                                                      \
  X(RThl, Step) X(RThli1, Step) X(RThli2, Step)                                         \
  X(RThltab1, Step) X(RThltab2, Step) X(RThlfun, Step)                                  \
  X(RThlpl1, Step) X(RThlpl2, Step)                                                     \
  X(RThlfunE, Error) X(RThlE, Error)                                                    \
  /* programs */                                                                        \
  X(RP1, Program) X(RP2, Program) X(RPE1, Program) X(RPE2, Program) X(RPE3, Program)
// clang-format on

enum class Rule : std::uint16_t {
#define ALEPH_RULE_ENUM(name, cls) name,
  ALEPH_RULES(ALEPH_RULE_ENUM)
#undef ALEPH_RULE_ENUM
};

inline constexpr std::size_t kRuleCount = 0
#define ALEPH_RULE_COUNT(name, cls) +1
    ALEPH_RULES(ALEPH_RULE_COUNT)
#undef ALEPH_RULE_COUNT
    ;

std::string_view rule_name(Rule r);
RuleClass rule_class(Rule r);
std::optional<Rule> parse_rule(std::string_view name);
const std::array<Rule, kRuleCount>& all_rules();

}  // namespace aleph
