#include <gtest/gtest.h>

#include "specforge/c_lexer.hpp"

using namespace specforge;
using lex::TokenKind;

TEST(Lexer, SplitsCodeAndKeepsComments)
{
    auto tokens = lex::tokenize("int x = a->b + 0x1f; /*@ assert x; */ // note\n");
    std::vector<std::string> texts;
    for (const auto& t : tokens) texts.push_back(t.text);
    std::vector<std::string> expect = {"int", "x", "=", "a", "->", "b", "+", "0x1f", ";",
                                       "/*@ assert x; */", "// note"};
    EXPECT_EQ(texts, expect);
    EXPECT_EQ(tokens[0].kind, TokenKind::Keyword);
    EXPECT_EQ(tokens[7].kind, TokenKind::Number);
    EXPECT_TRUE(tokens[9].annotation);
    EXPECT_TRUE(tokens[9].block);
    EXPECT_FALSE(tokens[10].annotation);
}

TEST(Lexer, OffsetsAndLinesMatchSource)
{
    const std::string src = "a\n  <= \"s\\\"t\"\n'c'";
    for (const auto& t : lex::tokenize(src)) EXPECT_EQ(src.substr(t.offset, t.text.size()), t.text);
    auto tokens = lex::code_tokens(src);
    ASSERT_EQ(tokens.size(), 4u);
    EXPECT_EQ(tokens[1].text, "<=");
    EXPECT_EQ(tokens[1].line, 2);
    EXPECT_EQ(tokens[2].kind, TokenKind::String);
    EXPECT_EQ(tokens[3].kind, TokenKind::Char);
    EXPECT_EQ(tokens[3].line, 3);
}

TEST(Lexer, AcslModePunctuators)
{
    auto tokens = lex::code_tokens("\\valid(p) ==> a[0..n-1] <==> b", {true, 1});
    std::vector<std::string> texts;
    for (const auto& t : tokens) texts.push_back(t.text);
    std::vector<std::string> expect = {"\\valid", "(", "p", ")", "==>", "a", "[", "0", "..",
                                       "n", "-", "1", "]", "<==>", "b"};
    EXPECT_EQ(texts, expect);
}

TEST(Lexer, DirectivesAreSingleTokens)
{
    auto tokens = lex::code_tokens("#include <stdio.h>\nint x;");
    ASSERT_GE(tokens.size(), 1u);
    EXPECT_EQ(tokens[0].kind, TokenKind::Directive);
    EXPECT_EQ(tokens[1].text, "int");
    EXPECT_EQ(tokens[1].line, 2);
}

TEST(Lexer, UnterminatedInputThrows)
{
    try {
        lex::tokenize("int x;\n/* open");
        FAIL();
    } catch (const lex::LexError& e) {
        EXPECT_EQ(e.kind(), lex::LexError::Kind::UnterminatedComment);
        EXPECT_EQ(e.line(), 2);
    }
    EXPECT_THROW(lex::tokenize("char* s = \"abc;\n"), lex::LexError);
}
