// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/policy_xml.hpp"

#include <cctype>
#include <map>

namespace rolechain
{
  namespace
  {
    // Minimal XML subset: one root element, nested elements with
    // attributes, comments, an optional declaration, the five named
    // entities, and whitespace-only text. That is all the policy language
    // needs, and parsing it directly keeps diagnostics line-accurate.

    struct XmlNode
    {
      std::string name;
      std::map<std::string, std::string> attributes;
      std::vector<XmlNode> children;
      std::size_t line = 0;
    };

    struct Cursor
    {
      std::string_view text;
      std::size_t pos = 0;
      std::size_t line = 1;

      bool eof() const
      {
        return pos >= text.size();
      }

      char peek() const
      {
        return text[pos];
      }

      char next()
      {
        char c = text[pos++];
        if (c == '\n')
          ++line;
        return c;
      }

      bool starts_with(std::string_view s) const
      {
        return text.substr(pos, s.size()) == s;
      }

      void expect(std::string_view s, const char* what)
      {
        if (!starts_with(s))
          throw ParseError(
            Errc::parse_error, std::string("expected ") + what, line);
        for (std::size_t i = 0; i < s.size(); ++i)
          next();
      }

      void skip_ws()
      {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek())))
          next();
      }
    };

    bool is_name_start(char c)
    {
      return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    }

    bool is_name_char(char c)
    {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
        c == '-' || c == ':' || c == '.';
    }

    std::string parse_name(Cursor& c)
    {
      if (c.eof() || !is_name_start(c.peek()))
        throw ParseError(Errc::parse_error, "expected a name", c.line);
      std::string name;
      while (!c.eof() && is_name_char(c.peek()))
        name.push_back(c.next());
      return name;
    }

    void skip_comment(Cursor& c)
    {
      std::size_t start = c.line;
      c.expect("<!--", "comment");
      while (!c.starts_with("-->"))
      {
        if (c.eof())
          throw ParseError(
            Errc::parse_error, "unterminated comment", start);
        c.next();
      }
      c.expect("-->", "comment end");
    }

    char decode_entity(Cursor& c)
    {
      std::size_t line = c.line;
      c.next(); // '&'
      std::string name;
      while (!c.eof() && c.peek() != ';')
      {
        name.push_back(c.next());
        if (name.size() > 8)
          break;
      }
      if (c.eof() || c.peek() != ';')
        throw ParseError(Errc::parse_error, "unterminated entity", line);
      c.next();
      if (name == "amp")
        return '&';
      if (name == "lt")
        return '<';
      if (name == "gt")
        return '>';
      if (name == "quot")
        return '"';
      if (name == "apos")
        return '\'';
      throw ParseError(
        Errc::parse_error, "unknown entity \"&" + name + ";\"", line);
    }

    std::string parse_attribute_value(Cursor& c)
    {
      if (c.eof() || (c.peek() != '"' && c.peek() != '\''))
        throw ParseError(
          Errc::parse_error, "expected a quoted attribute value", c.line);
      char quote = c.next();
      std::string value;
      for (;;)
      {
        if (c.eof())
          throw ParseError(
            Errc::parse_error, "unterminated attribute value", c.line);
        char ch = c.peek();
        if (ch == quote)
        {
          c.next();
          return value;
        }
        if (ch == '<')
          throw ParseError(
            Errc::parse_error, "raw '<' in attribute value", c.line);
        if (ch == '&')
        {
          value.push_back(decode_entity(c));
          continue;
        }
        value.push_back(c.next());
      }
    }

    XmlNode parse_element(Cursor& c)
    {
      XmlNode node;
      node.line = c.line;
      c.expect("<", "element");
      node.name = parse_name(c);

      for (;;)
      {
        c.skip_ws();
        if (c.eof())
          throw ParseError(
            Errc::parse_error,
            "unterminated element <" + node.name + ">",
            node.line,
            node.name);
        if (c.starts_with("/>"))
        {
          c.expect("/>", "element end");
          return node;
        }
        if (c.peek() == '>')
        {
          c.next();
          break;
        }
        std::size_t attr_line = c.line;
        std::string attr = parse_name(c);
        c.skip_ws();
        c.expect("=", "'=' after attribute name");
        c.skip_ws();
        std::string value = parse_attribute_value(c);
        if (!node.attributes.emplace(attr, value).second)
          throw ParseError(
            Errc::parse_error,
            "duplicate attribute \"" + attr + "\"",
            attr_line,
            node.name);
      }

      // Children until the matching close tag.
      for (;;)
      {
        std::size_t text_line = c.line;
        while (!c.eof() && c.peek() != '<')
        {
          if (!std::isspace(static_cast<unsigned char>(c.peek())))
            throw ParseError(
              Errc::parse_error,
              "unexpected text content in <" + node.name + ">",
              text_line,
              node.name);
          c.next();
        }
        if (c.eof())
          throw ParseError(
            Errc::parse_error,
            "missing close tag for <" + node.name + ">",
            node.line,
            node.name);
        if (c.starts_with("<!--"))
        {
          skip_comment(c);
          continue;
        }
        if (c.starts_with("</"))
        {
          std::size_t close_line = c.line;
          c.expect("</", "close tag");
          std::string close = parse_name(c);
          c.skip_ws();
          c.expect(">", "'>'");
          if (close != node.name)
            throw ParseError(
              Errc::parse_error,
              "close tag </" + close + "> does not match <" + node.name +
                ">",
              close_line,
              node.name);
          return node;
        }
        node.children.push_back(parse_element(c));
      }
    }

    XmlNode parse_document(std::string_view text)
    {
      Cursor c{text};
      c.skip_ws();
      if (c.starts_with("<?xml"))
      {
        std::size_t line = c.line;
        while (!c.starts_with("?>"))
        {
          if (c.eof())
            throw ParseError(
              Errc::parse_error, "unterminated XML declaration", line);
          c.next();
        }
        c.expect("?>", "'?>'");
      }
      for (;;)
      {
        c.skip_ws();
        if (c.starts_with("<!--"))
          skip_comment(c);
        else
          break;
      }
      if (c.eof())
        throw ParseError(Errc::parse_error, "no root element", c.line);
      XmlNode root = parse_element(c);
      for (;;)
      {
        c.skip_ws();
        if (c.eof())
          return root;
        if (c.starts_with("<!--"))
          skip_comment(c);
        else
          throw ParseError(
            Errc::parse_error, "content after the root element", c.line);
      }
    }

    std::string escape_attr(const std::string& s)
    {
      std::string out;
      for (char ch : s)
      {
        switch (ch)
        {
          case '&':
            out += "&amp;";
            break;
          case '<':
            out += "&lt;";
            break;
          case '>':
            out += "&gt;";
            break;
          case '"':
            out += "&quot;";
            break;
          default:
            out.push_back(ch);
        }
      }
      return out;
    }

    const std::string& require_attr(
      const XmlNode& node, const std::string& name)
    {
      auto it = node.attributes.find(name);
      if (it == node.attributes.end())
        throw ParseError(
          Errc::schema_violation,
          "<" + node.name + "> is missing attribute \"" + name + "\"",
          node.line,
          node.name);
      return it->second;
    }

    void reject_unknown_attrs(
      const XmlNode& node, std::initializer_list<const char*> allowed)
    {
      for (const auto& [attr, _] : node.attributes)
      {
        bool ok = false;
        for (const char* a : allowed)
          if (attr == a)
            ok = true;
        if (!ok)
          throw ParseError(
            Errc::schema_violation,
            "<" + node.name + "> has unknown attribute \"" + attr + "\"",
            node.line,
            node.name);
      }
    }
  }

  SodParseResult parse_sod_xml(std::string_view text)
  {
    XmlNode root = parse_document(text);
    if (root.name != "SoDPrinciple")
      throw ParseError(
        Errc::schema_violation,
        "expected root element <SoDPrinciple>, got <" + root.name + ">",
        root.line,
        root.name);
    reject_unknown_attrs(root, {"org"});

    SodParseResult result;
    auto org = root.attributes.find("org");
    if (org != root.attributes.end())
      result.document.org = org->second;

    for (const XmlNode& mer : root.children)
    {
      if (mer.name != "MERSet")
        throw ParseError(
          Errc::schema_violation,
          "expected <MERSet>, got <" + mer.name + ">",
          mer.line,
          mer.name);
      reject_unknown_attrs(mer, {"type", "cardinality"});

      MerSet set;
      set.kind = [&] {
        try
        {
          return mer_kind_from_string(require_attr(mer, "type"));
        }
        catch (const ParseError& e)
        {
          throw ParseError(
            Errc::schema_violation, e.what(), mer.line, mer.name);
        }
      }();

      const std::string& card = require_attr(mer, "cardinality");
      std::size_t consumed = 0;
      int k = 0;
      try
      {
        k = std::stoi(card, &consumed);
      }
      catch (const std::exception&)
      {
        consumed = 0;
      }
      if (consumed != card.size() || card.empty())
        throw ParseError(
          Errc::schema_violation,
          "cardinality \"" + card + "\" is not an integer",
          mer.line,
          mer.name);
      set.cardinality = k;

      for (const XmlNode& role : mer.children)
      {
        if (role.name != "Role")
          throw ParseError(
            Errc::schema_violation,
            "expected <Role>, got <" + role.name + ">",
            role.line,
            role.name);
        reject_unknown_attrs(role, {"value"});
        if (!role.children.empty())
          throw ParseError(
            Errc::schema_violation,
            "<Role> must be empty",
            role.line,
            role.name);
        const std::string& value = require_attr(role, "value");
        if (value.empty())
          throw ParseError(
            Errc::schema_violation,
            "<Role> value must not be empty",
            role.line,
            role.name);
        bool duplicate = false;
        for (const auto& existing : set.roles)
          if (existing == value)
            duplicate = true;
        if (duplicate)
          result.warnings.push_back(
            "line " + std::to_string(role.line) + ": duplicate role \"" +
            value + "\" in MERSet collapsed");
        else
          set.roles.push_back(value);
      }

      try
      {
        validate_mer_set(set);
      }
      catch (const Error& e)
      {
        throw ParseError(
          Errc::schema_violation, e.what(), mer.line, mer.name);
      }
      result.document.mer_sets.push_back(std::move(set));
    }

    return result;
  }

  std::string serialize_sod_xml(const SodPrincipleDocument& doc)
  {
    std::string out = "<SoDPrinciple org=\"" + escape_attr(doc.org) + "\">\n";
    for (const MerSet& set : doc.mer_sets)
    {
      out += "  <MERSet type=\"";
      out += to_string(set.kind);
      out += "\" cardinality=\"" + std::to_string(set.cardinality) + "\">\n";
      for (const auto& role : set.roles)
        out += "    <Role value=\"" + escape_attr(role) + "\"/>\n";
      out += "  </MERSet>\n";
    }
    out += "</SoDPrinciple>\n";
    return out;
  }

  std::vector<MerSet> to_array_form(const SodPrincipleDocument& doc)
  {
    return doc.mer_sets;
  }

  SodPrincipleDocument from_array_form(
    const std::vector<MerSet>& sets, const std::string& org)
  {
    return {org, sets};
  }
}
