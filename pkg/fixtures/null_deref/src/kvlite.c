/*
 * kvlite: replay a tiny key-value command script.
 *
 * Commands, one per line:
 *   set <key> <value>
 *   get <key>
 */

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#define MAX_ENTRIES 32

struct entry {
	char key[32];
	char value[64];
};

static struct entry store[MAX_ENTRIES];
static int store_used;

static struct entry* find_entry(const char* key)
{
	int i;

	for (i = 0; i < store_used; i++) {
		if (strcmp(store[i].key, key) == 0) {
			return &store[i];
		}
	}
	return 0;
}

static void cmd_set(const char* key, const char* value)
{
	struct entry* e;

	e = find_entry(key);
	if (!e) {
		if (store_used >= MAX_ENTRIES) {
			fprintf(stderr, "kvlite: store full\n");
			return;
		}
		e = &store[store_used++];
		snprintf(e->key, sizeof(e->key), "%s", key);
	}
	snprintf(e->value, sizeof(e->value), "%s", value);
}

static void cmd_get(const char* key)
{
	struct entry* e;

	e = find_entry(key);
	printf("%s=%s\n", key, e->value);
}

static void run_line(char* line)
{
	char* cmd;
	char* key;
	char* value;

	cmd = strtok(line, " \t\n");
	if (!cmd) {
		return;
	}
	key = strtok(0, " \t\n");
	if (!key) {
		fprintf(stderr, "kvlite: %s needs a key\n", cmd);
		return;
	}
	if (strcmp(cmd, "set") == 0) {
		value = strtok(0, "\n");
		cmd_set(key, value ? value : "");
	} else if (strcmp(cmd, "get") == 0) {
		cmd_get(key);
	} else {
		fprintf(stderr, "kvlite: unknown command %s\n", cmd);
	}
}

int main(int argc, char** argv)
{
	FILE* fp;
	char line[160];

	if (argc != 2) {
		fprintf(stderr, "usage: kvlite <script>\n");
		return 2;
	}
	fp = fopen(argv[1], "r");
	if (!fp) {
		perror(argv[1]);
		return 2;
	}
	while (fgets(line, sizeof(line), fp)) {
		run_line(line);
	}
	fclose(fp);
	return 0;
}
