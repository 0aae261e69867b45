/*
 * Contact header body parser: optional display name, then the address
 * (angle-quoted or bare), then ;name=value parameters, with contacts
 * separated by commas.
 */

#include "contact.h"

static contact_t slots[MAX_CONTACTS];
static int slots_used;

static contact_t* new_contact(const char* start)
{
	contact_t* c;

	if (slots_used >= MAX_CONTACTS) {
		return 0;
	}
	c = &slots[slots_used++];
	c->start = start;
	c->len = 0;
	return c;
}

static char* trim_leading(char* p, char* end)
{
	while (p < end && (*p == ' ' || *p == '\t')) {
		p++;
	}
	return p;
}

/*
 * Skip the display name, returning the position where the address
 * itself starts: the '<' of an angle-quoted URI, or the current
 * position when a ';' or ',' arrives first (no display name, the
 * contact is a bare URI).
 */
static char* skip_name(char* p, char* end)
{
	while (p < end && *p != '<') {
		if (*p == ';' || *p == ',') {
			return p;
		}
		p++;
	}
	return p;
}

static char* parse_quoted_param(char* p, char* end)
{
	p++;
	while (*p != '"') {
		p++;
	}
	return p + 1;
}

static char* parse_param_body(char* p, char* end)
{
	while (p < end && *p != '=' && *p != ';' && *p != ',') {
		p++;
	}
	if (p < end && *p == '=') {
		p++;
		if (p < end && *p == '"') {
			return parse_quoted_param(p, end);
		}
		while (p < end && *p != ';' && *p != ',') {
			p++;
		}
	}
	return p;
}

static char* parse_params(char* p, char* end)
{
	for (;;) {
		p = parse_param_body(p, end);
		if (p < end && *p == ';') {
			p++;
			continue;
		}
		return p;
	}
}

int parse_contacts(char* buf, int len)
{
	char* p;
	char* end;
	char* addr;
	contact_t* c;

	p = buf;
	end = buf + len;
	while (p < end) {
		p = trim_leading(p, end);
		if (p >= end) {
			break;
		}
		c = new_contact(p);
		if (!c) {
			return -1;
		}
		addr = skip_name(p, end);
		p = addr;
		if (p < end && *p == '<') {
			while (p < end && *p != '>') {
				p++;
			}
			if (p < end) {
				p++;
			}
		} else {
			while (p < end && *p != ';' && *p != ',') {
				p++;
			}
		}
		if (p < end && *p == ';') {
			p = parse_params(p + 1, end);
		}
		c->len = (int)(p - c->start);
		if (p < end && *p == ',') {
			p++;
		}
	}
	return slots_used;
}
