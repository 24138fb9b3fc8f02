# Generated by Django 5.2.6 on 2026-10-18 10:02

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='EvaluationReport',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('label', models.CharField(max_length=128)),
                ('dataset', models.CharField(max_length=32)),
                ('phase', models.CharField(max_length=16)),
                ('k_original', models.PositiveIntegerField()),
                ('n_aux', models.PositiveIntegerField(default=0)),
                ('guidance', models.CharField(blank=True, max_length=16)),
                ('segmenter', models.CharField(max_length=64)),
                ('seed', models.PositiveBigIntegerField()),
                ('folds', models.JSONField(default=dict, help_text='Fold index to mIoU')),
                ('mean_miou', models.FloatField()),
                ('episodes', models.PositiveIntegerField(default=0)),
                ('failures', models.PositiveIntegerField(default=0)),
                ('path', models.CharField(max_length=512)),
                ('run_dir', models.CharField(max_length=512)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'db_table': 'evaluation_reports',
                'ordering': ('-created_at', 'label'),
                'constraints': [models.UniqueConstraint(fields=('run_dir', 'label'), name='unique_report_label_per_run')],
            },
        ),
    ]
